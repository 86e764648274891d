use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{angle_between, cross, dot, normalize, EulerZYZ, Region, SphPoint, Vec3};
use crate::error::{Result, SlepError};

/// Largest number of vertices fed to the enclosing-cap search.
const SCAN_LIMIT: usize = 2048;

/// A rotationally symmetric region: all points within `radius_theta` of `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cap {
    pub center: SphPoint,
    pub radius_theta: f64,
}

impl Cap {
    pub fn new(center: SphPoint, radius_theta: f64) -> Result<Self> {
        if !(radius_theta > 0.0 && radius_theta <= PI) {
            return Err(SlepError::InvalidArgument(format!(
                "cap radius {radius_theta} outside (0, pi]"
            )));
        }
        Ok(Cap {
            center,
            radius_theta,
        })
    }

    /// The polar cap of radius `theta` around the north pole.
    pub fn polar(theta: f64) -> Result<Self> {
        Cap::new(SphPoint::NORTH, theta)
    }

    pub fn area(&self) -> f64 {
        2.0 * PI * (1.0 - self.radius_theta.cos())
    }

    /// `A / 4pi`, the fraction of the sphere covered.
    pub fn fraction(&self) -> f64 {
        (1.0 - self.radius_theta.cos()) / 2.0
    }

    pub fn contains(&self, p: &SphPoint) -> bool {
        angle_between(&self.center.to_xyz(), &p.to_xyz()) <= self.radius_theta
    }
}

#[derive(Clone, Copy)]
struct RawCap {
    c: Vec3,
    r: f64,
}

impl RawCap {
    fn covers(&self, p: &Vec3) -> bool {
        angle_between(&self.c, p) <= self.r + 1e-12
    }

    fn from_two(a: &Vec3, b: &Vec3) -> Option<RawCap> {
        let c = normalize(&[a[0] + b[0], a[1] + b[1], a[2] + b[2]])?;
        Some(RawCap {
            c,
            r: angle_between(&c, a).max(angle_between(&c, b)),
        })
    }

    fn from_three(a: &Vec3, b: &Vec3, c: &Vec3) -> Option<RawCap> {
        let ba = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let ca = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let mut n = normalize(&cross(&ba, &ca))?;
        if dot(&n, a) < 0.0 {
            n = [-n[0], -n[1], -n[2]];
        }
        let r = angle_between(&n, a)
            .max(angle_between(&n, b))
            .max(angle_between(&n, c));
        Some(RawCap { c: n, r })
    }
}

/// Minimum enclosing cap by randomized incremental construction. Only valid
/// when the points lie in an open hemisphere; callers verify coverage.
fn welzl(points: &[Vec3]) -> Option<RawCap> {
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    let mut cap = RawCap { c: pts[0], r: 0.0 };
    for i in 1..pts.len() {
        if cap.covers(&pts[i]) {
            continue;
        }
        cap = RawCap { c: pts[i], r: 0.0 };
        for j in 0..i {
            if cap.covers(&pts[j]) {
                continue;
            }
            cap = RawCap::from_two(&pts[i], &pts[j])?;
            for k in 0..j {
                if !cap.covers(&pts[k]) {
                    cap = RawCap::from_three(&pts[i], &pts[j], &pts[k])?;
                }
            }
        }
    }
    Some(cap)
}

fn subsample(points: &[Vec3]) -> Vec<Vec3> {
    if points.len() <= SCAN_LIMIT {
        return points.to_vec();
    }
    let step = points.len() as f64 / SCAN_LIMIT as f64;
    (0..SCAN_LIMIT)
        .map(|i| points[((i as f64 * step) as usize).min(points.len() - 1)])
        .collect()
}

/// A cap containing every boundary vertex of the region.
///
/// The farthest vertex pair gives the first candidate (center at the arc
/// midpoint, radius half the arc). When that candidate misses vertices the
/// minimum enclosing cap is computed instead, and as a last resort the
/// radius is grown about the candidate center until it covers everything.
pub fn enclosing_cap(region: &Region) -> Result<Cap> {
    let all: Vec<Vec3> = region
        .loops()
        .iter()
        .flat_map(|l| l.xyz().iter().copied())
        .collect();
    if all.len() < 3 {
        return Err(SlepError::DegenerateBoundary);
    }
    let scan = subsample(&all);

    let (mut best, mut bi, mut bj) = (-1.0, 0, 0);
    let (mut least, mut li, mut lj) = (f64::INFINITY, 0, 0);
    for i in 0..scan.len() {
        for j in (i + 1)..scan.len() {
            let d = angle_between(&scan[i], &scan[j]);
            if d > best {
                (best, bi, bj) = (d, i, j);
            }
            if d > 1e-12 && d < least {
                (least, li, lj) = (d, i, j);
            }
        }
    }
    if best < 1e-12 {
        return Err(SlepError::DegenerateBoundary);
    }

    let cover = |c: &Vec3| all.iter().map(|p| angle_between(c, p)).fold(0.0, f64::max);

    let pair = if best < PI - 1e-9 {
        RawCap::from_two(&scan[bi], &scan[bj])
    } else {
        // a nearly antipodal pair: centre on the side opposite the closest pair
        RawCap::from_two(&scan[li], &scan[lj]).map(|c| RawCap {
            c: [-c.c[0], -c.c[1], -c.c[2]],
            r: PI - least / 2.0,
        })
    };

    let mut chosen = pair.filter(|c| all.iter().all(|p| c.covers(p)));
    if chosen.is_none() {
        chosen = welzl(&scan).and_then(|c| {
            let r = cover(&c.c);
            (r < PI / 2.0).then_some(RawCap { c: c.c, r })
        });
    }
    let cap = match chosen {
        Some(c) => RawCap {
            c: c.c,
            r: c.r.max(cover(&c.c)),
        },
        None => {
            let c = pair.map(|p| p.c).unwrap_or(scan[bi]);
            RawCap { c, r: cover(&c) }
        }
    };
    if cap.r < 1e-12 {
        return Err(SlepError::DegenerateBoundary);
    }
    Cap::new(SphPoint::from_xyz(&cap.c), cap.r.min(PI))
}

/// The rotation taking the cap center to the north pole: a turn of
/// `-phi_c` about z followed by `-theta_c` about y, written as the z-y-z
/// triple `(pi, theta_c, pi - phi_c)`. Its inverse is `(phi_c, theta_c, 0)`.
pub fn pole_alignment(cap: &Cap) -> EulerZYZ {
    EulerZYZ::new(PI, cap.center.theta, PI - cap.center.phi)
}

#[cfg(test)]
mod tests {
    use super::super::{great_circle_distance, rotate_point, rotate_region};
    use super::*;

    #[test]
    fn circle_is_its_own_cap() {
        let cap = Cap::polar(20f64.to_radians()).unwrap();
        let region = Region::cap_polygon(&cap, 72).unwrap();
        let found = enclosing_cap(&region).unwrap();
        assert!(found.center.theta < 1e-6);
        assert!((found.radius_theta - 20f64.to_radians()).abs() < 1e-4);
    }

    #[test]
    fn sliver_uses_arc_midpoint() {
        let pts = vec![
            SphPoint::new(PI / 2.0, 0.0),
            SphPoint::new(PI / 2.0 - 0.01, PI / 4.0),
            SphPoint::new(PI / 2.0, PI / 2.0),
            SphPoint::new(PI / 2.0 + 0.01, PI / 4.0),
        ];
        let region = Region::from_loops(vec![pts]).unwrap();
        let cap = enclosing_cap(&region).unwrap();
        assert!((cap.radius_theta - PI / 4.0).abs() < 1e-12);
        assert!((cap.center.theta - PI / 2.0).abs() < 1e-12);
        assert!((cap.center.phi - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn alignment_lands_on_pole() {
        for (t, p) in [(0.0, 0.0), (0.4, 0.0), (0.6, 2.1), (2.9, 5.5), (PI, 0.0)] {
            let cap = Cap::new(SphPoint::new(t, p), 0.3).unwrap();
            let e = pole_alignment(&cap);
            assert!(rotate_point(&e, &cap.center).theta <= 1e-10);
            let back = rotate_point(&e.inverse(), &SphPoint::NORTH);
            assert!(great_circle_distance(&back, &cap.center) < 1e-10);
        }
    }

    #[test]
    fn alignment_contains_rotated_region() {
        let pts: Vec<SphPoint> = (0..40)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / 40.0;
                let r = 0.2 + 0.1 * (3.0 * a).sin();
                SphPoint::from_xyz(&super::super::rotate_point(
                    &EulerZYZ::new(1.3, 1.1, 0.0),
                    &SphPoint::new(r, a),
                ).to_xyz())
            })
            .collect();
        let region = Region::from_loops(vec![pts]).unwrap();
        let cap = enclosing_cap(&region).unwrap();
        let rotated = rotate_region(&region, &pole_alignment(&cap));
        for l in rotated.loops() {
            for v in l.vertices() {
                assert!(v.theta <= cap.radius_theta + 1e-9);
            }
        }
    }

    #[test]
    fn zero_radius_rejected() {
        assert!(Cap::new(SphPoint::NORTH, 0.0).is_err());
        assert!(Cap::new(SphPoint::NORTH, PI + 0.1).is_err());
        let raw = [[0.0, 0.0, 1.0]; 3];
        assert_eq!(welzl(&raw).unwrap().r, 0.0);
    }

    #[test]
    fn nonconvex_loop_gets_minimal_cap() {
        // an L-shaped loop whose farthest pair does not cover the corner
        let pts: Vec<SphPoint> = [(0.0, 0.0), (0.0, 30.0), (10.0, 30.0), (10.0, 10.0), (30.0, 10.0), (30.0, 0.0)]
            .iter()
            .map(|&(la, lo)| SphPoint::from_lat_lon_deg(la, lo))
            .collect();
        let region = Region::from_loops(vec![pts.clone()]).unwrap();
        let cap = enclosing_cap(&region).unwrap();
        for p in &pts {
            assert!(great_circle_distance(p, &cap.center) <= cap.radius_theta + 1e-9);
        }
        assert!(cap.radius_theta < 22f64.to_radians());
    }
}

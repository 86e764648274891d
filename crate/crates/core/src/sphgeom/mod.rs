//! Points, rotations and regions on the unit sphere.
//!
//! Points are stored as colatitude/longitude pairs; geometric predicates
//! work on the Cartesian image. Rotations use the z-y-z Euler convention
//! with right-handed active rotations, `R = Rz(phi) Ry(vartheta) Rz(omega)`.

mod cap;
mod region;

use std::f64::consts::PI;

pub use cap::{enclosing_cap, pole_alignment, Cap};
pub use region::{load_region, parse_region, Loop, Region};

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn normalize(a: &Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n < 1e-300 || !n.is_finite() {
        None
    } else {
        Some([a[0] / n, a[1] / n, a[2] / n])
    }
}

/// Angle between two unit vectors, accurate near 0 and near pi.
#[inline]
pub(crate) fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    norm(&cross(a, b)).atan2(dot(a, b))
}

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphPoint {
    /// Colatitude in `[0, pi]`.
    pub theta: f64,
    /// Longitude in `[0, 2pi)`.
    pub phi: f64,
}

impl SphPoint {
    pub const NORTH: SphPoint = SphPoint { theta: 0.0, phi: 0.0 };
    pub const SOUTH: SphPoint = SphPoint { theta: PI, phi: 0.0 };

    /// Builds a point, clamping colatitude into `[0, pi]` and wrapping the
    /// longitude into `[0, 2pi)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        SphPoint {
            theta: theta.clamp(0.0, PI),
            phi,
        }
    }

    /// Geographic latitude/longitude in degrees.
    pub fn from_lat_lon_deg(lat: f64, lon: f64) -> Self {
        SphPoint::new((90.0 - lat).to_radians(), lon.to_radians())
    }

    pub fn lat_lon_deg(&self) -> (f64, f64) {
        (90.0 - self.theta.to_degrees(), {
            let lon = self.phi.to_degrees();
            if lon > 180.0 {
                lon - 360.0
            } else {
                lon
            }
        })
    }

    pub fn to_xyz(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Inverse of [`SphPoint::to_xyz`]; the input need not be normalized.
    pub fn from_xyz(v: &Vec3) -> Self {
        let rho = (v[0] * v[0] + v[1] * v[1]).sqrt();
        let theta = rho.atan2(v[2]);
        let phi = if rho == 0.0 { 0.0 } else { v[1].atan2(v[0]) };
        SphPoint::new(theta, phi)
    }

    pub fn antipode(&self) -> Self {
        let v = self.to_xyz();
        SphPoint::from_xyz(&[-v[0], -v[1], -v[2]])
    }
}

/// Great-circle distance in radians, in `[0, pi]`.
pub fn great_circle_distance(p: &SphPoint, q: &SphPoint) -> f64 {
    angle_between(&p.to_xyz(), &q.to_xyz())
}

/// z-y-z Euler angles `(phi, vartheta, omega)`: rotate by `omega` about z,
/// then `vartheta` about y, then `phi` about z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerZYZ {
    pub phi: f64,
    pub vartheta: f64,
    pub omega: f64,
}

pub type Mat3 = [[f64; 3]; 3];

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

impl EulerZYZ {
    pub const IDENTITY: EulerZYZ = EulerZYZ {
        phi: 0.0,
        vartheta: 0.0,
        omega: 0.0,
    };

    pub fn new(phi: f64, vartheta: f64, omega: f64) -> Self {
        EulerZYZ {
            phi,
            vartheta,
            omega,
        }
    }

    /// The inverse rotation `(pi - omega, vartheta, pi - phi)`.
    pub fn inverse(&self) -> Self {
        EulerZYZ {
            phi: (PI - self.omega).rem_euclid(2.0 * PI),
            vartheta: self.vartheta,
            omega: (PI - self.phi).rem_euclid(2.0 * PI),
        }
    }

    /// The 3x3 matrix `Rz(phi) Ry(vartheta) Rz(omega)`.
    pub fn matrix(&self) -> Mat3 {
        mat_mul(
            &rot_z(self.phi),
            &mat_mul(&rot_y(self.vartheta), &rot_z(self.omega)),
        )
    }

    pub(crate) fn apply_xyz(&self, v: &Vec3) -> Vec3 {
        let r = self.matrix();
        apply_mat(&r, v)
    }
}

#[inline]
pub(crate) fn apply_mat(r: &Mat3, v: &Vec3) -> Vec3 {
    [
        r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
        r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
        r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2],
    ]
}

/// Applies the rotation matrix of `euler` to a point.
pub fn rotate_point(euler: &EulerZYZ, p: &SphPoint) -> SphPoint {
    SphPoint::from_xyz(&euler.apply_xyz(&p.to_xyz()))
}

/// Rotates every vertex of every loop; the rotated region keeps its
/// orientation, so the area is unchanged.
pub fn rotate_region(region: &Region, euler: &EulerZYZ) -> Region {
    let r = euler.matrix();
    region.map_vertices(|v| apply_mat(&r, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng) -> SphPoint {
        let z: f64 = rng.gen_range(-1.0..1.0);
        SphPoint::new(z.acos(), rng.gen_range(0.0..2.0 * PI))
    }

    fn random_euler(rng: &mut impl Rng) -> EulerZYZ {
        EulerZYZ::new(
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..PI),
            rng.gen_range(0.0..2.0 * PI),
        )
    }

    #[test]
    fn distance_examples() {
        assert!((great_circle_distance(&SphPoint::NORTH, &SphPoint::SOUTH) - PI).abs() < 1e-15);
        let a = SphPoint::new(PI / 2.0, 0.0);
        let b = SphPoint::new(PI / 2.0, PI / 2.0);
        assert!((great_circle_distance(&a, &b) - PI / 2.0).abs() < 1e-15);
        assert_eq!(great_circle_distance(&a, &a), 0.0);
    }

    #[test]
    fn point_normalization() {
        let p = SphPoint::new(0.3, -0.5);
        assert!(p.phi >= 0.0 && p.phi < 2.0 * PI);
        assert!((norm(&p.to_xyz()) - 1.0).abs() < 1e-12);
        let q = SphPoint::from_xyz(&p.to_xyz());
        assert!((q.theta - p.theta).abs() < 1e-14 && (q.phi - p.phi).abs() < 1e-14);
    }

    #[test]
    fn rotation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = random_point(&mut rng);
        let q = rotate_point(&EulerZYZ::IDENTITY, &p);
        assert!(great_circle_distance(&p, &q) < 1e-14);

        let tc = 0.83;
        let r = rotate_point(&EulerZYZ::new(0.0, tc, 0.0), &SphPoint::NORTH);
        assert!((r.theta - tc).abs() < 1e-14 && r.phi.abs() < 1e-14);

        for _ in 0..20 {
            let m = random_euler(&mut rng).matrix();
            let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            assert!((det - 1.0).abs() < 1e-12);
            for i in 0..3 {
                for j in 0..3 {
                    let g: f64 = (0..3).map(|k| m[k][i] * m[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let e = random_euler(&mut rng);
            let prod = mat_mul(&e.matrix(), &e.inverse().matrix());
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[i][j] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rotation_preserves_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (p, q) = (random_point(&mut rng), random_point(&mut rng));
            let e = random_euler(&mut rng);
            let d0 = great_circle_distance(&p, &q);
            let d1 = great_circle_distance(&rotate_point(&e, &p), &rotate_point(&e, &q));
            assert!((d0 - d1).abs() < 1e-12);
        }
    }
}

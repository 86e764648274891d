use std::f64::consts::PI;
use std::path::Path;

use super::{angle_between, cross, dot, normalize, Cap, SphPoint, Vec3};
use crate::error::{Result, SlepError};

/// One closed boundary loop, oriented so its interior (the smaller of the
/// two sides) lies to the left of the direction of travel.
#[derive(Debug, Clone)]
pub struct Loop {
    vertices: Vec<SphPoint>,
    xyz: Vec<Vec3>,
    area: f64,
    // bounding cap used to reject far points quickly; cos_radius = -2 disables it
    bound_center: Vec3,
    bound_cos: f64,
}

/// Signed area of the spherical triangle (c, a, b).
fn signed_triangle(c: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let num = dot(c, &cross(a, b));
    let den = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * num.atan2(den)
}

/// True when the great-circle arcs ab and cd cross at a point interior to both.
fn arcs_cross(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let ab = cross(a, b);
    let acb = -dot(&ab, c);
    let bda = dot(&ab, d);
    if acb * bda <= 0.0 {
        return false;
    }
    let cd = cross(c, d);
    let cbd = -dot(&cd, b);
    let dac = dot(&cd, a);
    acb * cbd > 0.0 && acb * dac > 0.0
}

impl Loop {
    fn build(xyz: Vec<Vec3>, area: f64) -> Loop {
        let vertices = xyz.iter().map(SphPoint::from_xyz).collect();
        let sum = xyz.iter().fold([0.0; 3], |s, v| [s[0] + v[0], s[1] + v[1], s[2] + v[2]]);
        let (bound_center, bound_cos) = match normalize(&sum) {
            Some(c) => {
                let r = xyz.iter().map(|v| angle_between(&c, v)).fold(0.0, f64::max);
                if r < PI / 2.0 - 1e-6 {
                    (c, r.cos() - 1e-12)
                } else {
                    (c, -2.0)
                }
            }
            None => ([0.0, 0.0, 1.0], -2.0),
        };
        Loop {
            vertices,
            xyz,
            area,
            bound_center,
            bound_cos,
        }
    }

    fn new(points: &[SphPoint]) -> Result<Loop> {
        if points.len() < 3 {
            return Err(SlepError::InvalidRegion(format!(
                "loop has {} vertices, need at least 3",
                points.len()
            )));
        }
        let mut xyz: Vec<Vec3> = points.iter().map(|p| p.to_xyz()).collect();
        let n = xyz.len();
        for i in 0..n {
            let d = angle_between(&xyz[i], &xyz[(i + 1) % n]);
            if d < 1e-12 {
                return Err(SlepError::InvalidRegion(format!(
                    "duplicate consecutive vertices at {i}"
                )));
            }
            if d > PI - 1e-9 {
                return Err(SlepError::InvalidRegion(format!(
                    "antipodal consecutive vertices at {i}"
                )));
            }
        }

        let centroid = xyz
            .iter()
            .fold([0.0; 3], |s, v| [s[0] + v[0], s[1] + v[1], s[2] + v[2]]);
        let c = normalize(&centroid).unwrap_or(xyz[0]);
        let signed: f64 = (0..n)
            .map(|i| signed_triangle(&c, &xyz[i], &xyz[(i + 1) % n]))
            .sum();
        let left = if signed > 0.0 { signed } else { 4.0 * PI + signed };
        let area = if left > 2.0 * PI {
            xyz.reverse();
            4.0 * PI - left
        } else {
            left
        };
        if !(area > 0.0) {
            return Err(SlepError::DegenerateBoundary);
        }
        let lp = Loop::build(xyz, area);
        lp.check_simple()?;
        Ok(lp)
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.xyz.len();
        if n < 4 {
            return Ok(());
        }
        let v = &self.xyz;
        for i in 0..n {
            let (a, b) = (&v[i], &v[(i + 1) % n]);
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (&v[j], &v[(j + 1) % n]);
                if arcs_cross(a, b, c, d) {
                    return Err(SlepError::NonSimpleBoundary(0, i, j));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[SphPoint] {
        &self.vertices
    }

    pub(crate) fn xyz(&self) -> &[Vec3] {
        &self.xyz
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub(crate) fn contains_xyz(&self, p: &Vec3) -> bool {
        if dot(p, &self.bound_center) < self.bound_cos {
            return false;
        }
        let n = self.xyz.len();
        let mut winding = 0.0;
        for i in 0..n {
            let a = &self.xyz[i];
            let b = &self.xyz[(i + 1) % n];
            let pa = dot(p, a);
            if pa > 1.0 - 1e-15 {
                return true;
            }
            let num = dot(p, &cross(a, b));
            let den = dot(a, b) - pa * dot(p, b);
            winding += num.atan2(den);
        }
        winding > PI
    }
}

/// A union of disjoint simple spherical polygons.
#[derive(Debug, Clone)]
pub struct Region {
    loops: Vec<Loop>,
    area: f64,
}

impl Region {
    pub fn from_loops(loops: Vec<Vec<SphPoint>>) -> Result<Region> {
        if loops.is_empty() {
            return Err(SlepError::InvalidRegion("no loops".into()));
        }
        let mut out = Vec::with_capacity(loops.len());
        for (k, pts) in loops.iter().enumerate() {
            let lp = Loop::new(pts).map_err(|e| match e {
                SlepError::NonSimpleBoundary(_, i, j) => SlepError::NonSimpleBoundary(k, i, j),
                other => other,
            })?;
            out.push(lp);
        }
        let area = out.iter().map(|l| l.area).sum::<f64>();
        if !(area > 0.0 && area < 4.0 * PI) {
            return Err(SlepError::InvalidRegion(format!("area {area} outside (0, 4pi)")));
        }
        Ok(Region { loops: out, area })
    }

    /// A polygon with `n` vertices equally spaced on the boundary circle of `cap`.
    pub fn cap_polygon(cap: &Cap, n: usize) -> Result<Region> {
        let back = super::EulerZYZ::new(cap.center.phi, cap.center.theta, 0.0);
        let pts = (0..n)
            .map(|k| {
                let p = SphPoint::new(cap.radius_theta, 2.0 * PI * k as f64 / n as f64);
                super::rotate_point(&back, &p)
            })
            .collect();
        Region::from_loops(vec![pts])
    }

    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn vertex_count(&self) -> usize {
        self.loops.iter().map(|l| l.xyz.len()).sum()
    }

    /// Area in steradians, by spherical excess.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Boundary vertices count as inside.
    pub fn contains(&self, p: &SphPoint) -> bool {
        self.contains_xyz(&p.to_xyz())
    }

    pub(crate) fn contains_xyz(&self, p: &Vec3) -> bool {
        self.loops.iter().any(|l| l.contains_xyz(p))
    }

    pub(crate) fn map_vertices(&self, f: impl Fn(&Vec3) -> Vec3) -> Region {
        let loops = self
            .loops
            .iter()
            .map(|l| Loop::build(l.xyz.iter().map(&f).collect(), l.area))
            .collect();
        Region {
            loops,
            area: self.area,
        }
    }
}

/// Parses "lat lon" lines in degrees; blank lines separate loops and lines
/// starting with '#' are skipped. `origin` labels error messages.
pub fn parse_region(text: &str, origin: &Path) -> Result<Region> {
    let perr = |line: usize, msg: String| SlepError::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut loops: Vec<Vec<SphPoint>> = Vec::new();
    let mut starts: Vec<usize> = Vec::new();
    let mut current: Vec<(usize, SphPoint)> = Vec::new();
    let mut flush = |cur: &mut Vec<(usize, SphPoint)>| -> Result<()> {
        if cur.is_empty() {
            return Ok(());
        }
        let n = cur.len();
        if n < 3 {
            return Err(perr(cur[0].0, format!("loop has {n} vertices, need at least 3")));
        }
        for i in 0..n {
            let (li, p) = cur[i];
            let q = cur[(i + 1) % n].1;
            let d = angle_between(&p.to_xyz(), &q.to_xyz());
            let at = if i + 1 == n { cur[0].0 } else { cur[i + 1].0 };
            if d < 1e-12 {
                return Err(perr(at, format!("duplicate of vertex on line {li}")));
            }
            if d > PI - 1e-9 {
                return Err(perr(at, format!("antipodal to vertex on line {li}")));
            }
        }
        starts.push(cur[0].0);
        loops.push(cur.drain(..).map(|(_, p)| p).collect());
        Ok(())
    };

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            flush(&mut current)?;
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(perr(line_no, format!("expected 'lat lon', got {line:?}")));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| perr(line_no, format!("not a number: {s:?}")))
        };
        let (lat, lon) = (parse(fields[0])?, parse(fields[1])?);
        if !(-90.0..=90.0).contains(&lat) {
            return Err(perr(line_no, format!("latitude {lat} out of range")));
        }
        current.push((line_no, SphPoint::from_lat_lon_deg(lat, lon)));
    }
    flush(&mut current)?;
    if loops.is_empty() {
        return Err(perr(0, "no vertices".into()));
    }

    let mut out = Vec::with_capacity(loops.len());
    for (k, pts) in loops.iter().enumerate() {
        match Loop::new(pts) {
            Ok(l) => out.push(l),
            Err(SlepError::NonSimpleBoundary(_, i, j)) => {
                return Err(perr(
                    starts[k] + i,
                    format!("non-simple boundary: edges {i} and {j} of loop {k} cross"),
                ))
            }
            Err(e) => return Err(perr(starts[k], e.to_string())),
        }
    }
    let area = out.iter().map(|l| l.area).sum::<f64>();
    Ok(Region { loops: out, area })
}

pub fn load_region(path: impl AsRef<Path>) -> Result<Region> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SlepError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    })?;
    parse_region(&text, path)
}

//! Equiangular sampling of the sphere, region masks and deterministic
//! weighted sums.
//!
//! Rings sit at `θ_j = jπ/(n_θ-1)` including both poles and each ring has
//! `n_φ` equispaced longitudes. The colatitude weights are Clenshaw–Curtis
//! weights in `cos θ` on those same nodes, so the rule integrates
//! `P(cos θ) e^{ikφ}` exactly for polynomial degree below `n_θ` and
//! `|k| < n_φ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SlepError};
use crate::sphgeom::{Cap, Region, SphPoint};

/// Samples per reduction chunk. Fixed so sums do not depend on thread count.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone)]
pub struct EquiangularGrid {
    n_theta: usize,
    n_phi: usize,
    thetas: Vec<f64>,
    phis: Vec<f64>,
    ring_weights: Vec<f64>,
}

/// Clenshaw–Curtis weights for the `n + 1` nodes `cos(jπ/n)` on `[-1, 1]`.
fn clenshaw_curtis(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![2.0];
    }
    let nf = n as f64;
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n { 1.0 } else { 2.0 };
            let mut s = 0.0;
            for k in 1..=n / 2 {
                let b = if 2 * k == n { 1.0 } else { 2.0 };
                s += b / (4.0 * (k * k) as f64 - 1.0)
                    * (2.0 * PI * (j * k) as f64 / nf).cos();
            }
            c / nf * (1.0 - s)
        })
        .collect()
}

impl EquiangularGrid {
    /// `n_θ = res (2L+1)` rounded up to odd and `n_φ = res (2L+1)`.
    pub fn build(resolution: usize, band_limit: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(SlepError::InvalidArgument("grid resolution must be >= 1".into()));
        }
        let base = resolution * (2 * band_limit + 1);
        let n_theta = if base % 2 == 0 { base + 1 } else { base };
        Self::with_counts(n_theta, base)
    }

    pub fn with_counts(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 1 {
            return Err(SlepError::InvalidArgument(format!(
                "grid needs at least 2 rings and 1 longitude, got {n_theta} x {n_phi}"
            )));
        }
        let n = n_theta - 1;
        let thetas = (0..n_theta).map(|j| j as f64 * PI / n as f64).collect();
        let phis = (0..n_phi).map(|k| 2.0 * PI * k as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let ring_weights = clenshaw_curtis(n).into_iter().map(|w| w * dphi).collect();
        Ok(EquiangularGrid {
            n_theta,
            n_phi,
            thetas,
            phis,
            ring_weights,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    /// Sample count `M`.
    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Weight of every sample on ring `j`.
    pub fn ring_weight(&self, j: usize) -> f64 {
        self.ring_weights[j]
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.ring_weights[idx / self.n_phi]
    }

    pub fn point(&self, idx: usize) -> SphPoint {
        SphPoint::new(self.thetas[idx / self.n_phi], self.phis[idx % self.n_phi])
    }

    pub fn points(&self) -> Vec<SphPoint> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    /// Largest single-cell area, `Δθ Δφ` at the equator.
    pub fn cell_area(&self) -> f64 {
        PI / (self.n_theta - 1) as f64 * 2.0 * PI / self.n_phi as f64
    }
}

/// Which grid samples are inside a region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    inside: Vec<bool>,
}

impl RegionMask {
    pub fn full(grid: &EquiangularGrid) -> Self {
        RegionMask {
            inside: vec![true; grid.len()],
        }
    }

    pub fn for_region(grid: &EquiangularGrid, region: &Region) -> Self {
        let inside = (0..grid.len())
            .into_par_iter()
            .with_min_len(256)
            .map(|i| region.contains_xyz(&grid.point(i).to_xyz()))
            .collect();
        RegionMask { inside }
    }

    pub fn for_cap(grid: &EquiangularGrid, cap: &Cap) -> Self {
        let inside = (0..grid.len()).map(|i| cap.contains(&grid.point(i))).collect();
        RegionMask { inside }
    }

    pub fn from_bools(inside: Vec<bool>) -> Self {
        RegionMask { inside }
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|b| **b).count()
    }

    /// Indices of the samples inside, ascending.
    pub fn indices(&self) -> Vec<usize> {
        self.inside
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
            .collect()
    }

    /// Σ weights over masked samples.
    pub fn area(&self, grid: &EquiangularGrid) -> f64 {
        let w: Vec<f64> = (0..grid.len())
            .map(|i| if self.inside[i] { grid.weight(i) } else { 0.0 })
            .collect();
        deterministic_sum(&w)
    }
}

/// Sum in fixed chunks, combined in index order.
pub fn deterministic_sum(values: &[f64]) -> f64 {
    let parts: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    parts.iter().sum()
}

pub fn deterministic_sum_complex(values: &[Complex64]) -> Complex64 {
    let parts: Vec<Complex64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<Complex64>())
        .collect();
    parts.iter().sum()
}

/// `Σ_masked w · conj(a) · b`.
pub fn integrate_product(
    a: &[Complex64],
    b: &[Complex64],
    grid: &EquiangularGrid,
    mask: &RegionMask,
) -> Result<Complex64> {
    for len in [a.len(), b.len(), mask.inside.len()] {
        if len != grid.len() {
            return Err(SlepError::LengthMismatch {
                expected: grid.len(),
                got: len,
            });
        }
    }
    let n = grid.len();
    let parts: Vec<Complex64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut s = Complex64::new(0.0, 0.0);
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                if mask.inside[i] {
                    s += a[i].conj() * b[i] * grid.weight(i);
                }
            }
            s
        })
        .collect();
    Ok(parts.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clenshaw_curtis_integrates_monomials() {
        let n = 10;
        let w = clenshaw_curtis(n);
        for deg in 0..=n {
            let got: f64 = (0..=n)
                .map(|j| w[j] * (j as f64 * PI / n as f64).cos().powi(deg as i32))
                .sum();
            let want = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "degree {deg}");
        }
        assert!(w.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn grid_shape() {
        let g = EquiangularGrid::build(1, 8).unwrap();
        assert_eq!((g.n_theta(), g.n_phi()), (17, 17));
        let g = EquiangularGrid::build(2, 8).unwrap();
        assert_eq!((g.n_theta(), g.n_phi()), (35, 34));
        assert_eq!(g.len(), 35 * 34);
        assert!(EquiangularGrid::build(0, 8).is_err());
    }

    #[test]
    fn total_weight_is_four_pi() {
        for (res, l) in [(1, 4), (2, 16), (3, 33)] {
            let g = EquiangularGrid::build(res, l).unwrap();
            let area = RegionMask::full(&g).area(&g);
            assert!((area / (4.0 * PI) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn length_mismatch() {
        let g = EquiangularGrid::build(1, 2).unwrap();
        let a = vec![Complex64::new(1.0, 0.0); g.len()];
        let b = vec![Complex64::new(1.0, 0.0); 3];
        assert!(integrate_product(&a, &b, &g, &RegionMask::full(&g)).is_err());
    }
}

//! Wigner-d matrices and spectral rotation.
//!
//! For each degree the y-component of angular momentum is diagonalized
//! once: in the basis rescaled by `i^m` it is the real symmetric
//! tridiagonal matrix with off-diagonals `-sqrt(l(l+1) - m(m+1)) / 2`, with
//! eigenvalues exactly `-l..=l`. Then
//! `d_{m m'}(β) = Re[i^{m-m'} Σ_k W_{mk} W_{m'k} e^{-iβk}]`,
//! which is accurate for every `β` and every degree.

use faer::{Mat, Side};
use num_complex::Complex64;

use super::{flat_index, SpectralVector};
use crate::error::{Result, SlepError};
use crate::sphgeom::EulerZYZ;

/// Orthogonal eigenvectors of the rescaled `J_y` for one degree, stored
/// row-major `(2l+1) x (2l+1)`; row index `m + l`, column index `k + l`.
#[derive(Debug, Clone)]
struct JyBasis {
    l: usize,
    w: Vec<f64>,
}

impl JyBasis {
    fn new(l: usize) -> JyBasis {
        let n = 2 * l + 1;
        if l == 0 {
            return JyBasis { l, w: vec![1.0] };
        }
        let lf = l as f64;
        let off = |i: usize| {
            let m = i as f64 - lf;
            -(lf * (lf + 1.0) - m * (m + 1.0)).sqrt() / 2.0
        };
        let t = Mat::<f64>::from_fn(n, n, |i, j| {
            if j == i + 1 {
                off(i)
            } else if i == j + 1 {
                off(j)
            } else {
                0.0
            }
        });
        let eig = t
            .self_adjoint_eigen(Side::Lower)
            .expect("symmetric tridiagonal eigendecomposition");
        let u = eig.U();
        for k in 0..n {
            debug_assert!((eig.S()[k] - (k as f64 - lf)).abs() < 1e-8);
        }
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                w[i * n + k] = u[(i, k)];
            }
        }
        JyBasis { l, w }
    }

    fn dim(&self) -> usize {
        2 * self.l + 1
    }

    fn d(&self, m: i64, mp: i64, beta: f64) -> f64 {
        let n = self.dim();
        let l = self.l as i64;
        let (r, c) = ((m + l) as usize, (mp + l) as usize);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let kk = k as f64 - l as f64;
            acc += Complex64::from_polar(self.w[r * n + k] * self.w[c * n + k], -beta * kk);
        }
        (acc * i_pow(m - mp)).re
    }
}

#[inline]
fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Wigner small-d element `d^l_{m, mp}(β)`; zero when an order exceeds the degree.
pub fn wignerd_little(l: usize, m: i64, mp: i64, beta: f64) -> f64 {
    let li = l as i64;
    if m.abs() > li || mp.abs() > li {
        return 0.0;
    }
    JyBasis::new(l).d(m, mp, beta)
}

/// The full `(2l+1) x (2l+1)` matrix `d^l(β)`, row-major, rows and columns
/// ordered `m = -l..=l`.
pub fn wignerd_matrix(l: usize, beta: f64) -> Vec<f64> {
    let basis = JyBasis::new(l);
    let n = basis.dim();
    let li = l as i64;
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = basis.d(r as i64 - li, c as i64 - li, beta);
        }
    }
    out
}

/// Precomputed per-degree data for rotating band-limited coefficient
/// vectors; build once and share across threads.
#[derive(Debug, Clone)]
pub struct SpectralRotator {
    band_limit: usize,
    blocks: Vec<JyBasis>,
}

impl SpectralRotator {
    pub fn new(band_limit: usize) -> SpectralRotator {
        use rayon::prelude::*;
        let blocks = (0..band_limit).into_par_iter().map(JyBasis::new).collect();
        SpectralRotator { band_limit, blocks }
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Coefficients of `x -> f(R^{-1} x)` where `R` is the matrix of `euler`:
    /// `g_m = e^{-imφ} Σ_{m'} d_{m m'}(ϑ) e^{-im'ω} v_{m'}` per degree.
    pub fn rotate(&self, v: &SpectralVector, euler: &EulerZYZ) -> Result<SpectralVector> {
        if v.band_limit() != self.band_limit {
            return Err(SlepError::BandLimitMismatch(v.band_limit(), self.band_limit));
        }
        let mut out = SpectralVector::zeros(self.band_limit);
        let mut u = Vec::new();
        let mut t = Vec::new();
        for block in &self.blocks {
            let l = block.l as i64;
            let n = block.dim();
            u.clear();
            for mp in -l..=l {
                let c = v.coeffs()[flat_index(block.l, mp)];
                u.push(c * Complex64::from_polar(1.0, -(mp as f64) * euler.omega) * i_pow(-mp));
            }
            t.clear();
            for k in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    acc += u[r] * block.w[r * n + k];
                }
                let kk = k as f64 - l as f64;
                t.push(acc * Complex64::from_polar(1.0, -euler.vartheta * kk));
            }
            let dst = out.coeffs_mut();
            for (r, m) in (-l..=l).enumerate() {
                let row = &block.w[r * n..(r + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += t[k] * row[k];
                }
                dst[flat_index(block.l, m)] =
                    acc * i_pow(m) * Complex64::from_polar(1.0, -(m as f64) * euler.phi);
            }
        }
        Ok(out)
    }
}

/// Rotates a single spectral vector; see [`SpectralRotator::rotate`].
pub fn rotate_spectral(v: &SpectralVector, euler: &EulerZYZ) -> SpectralVector {
    SpectralRotator::new(v.band_limit())
        .rotate(v, euler)
        .expect("rotator built for this band-limit")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero_angle() {
        for l in [0usize, 1, 5, 12] {
            let d = wignerd_matrix(l, 0.0);
            let n = 2 * l + 1;
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((d[r * n + c] - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn degree_one_closed_forms() {
        for k in 0..20 {
            let b = -3.0 + 0.31 * k as f64;
            assert!((wignerd_little(1, 0, 0, b) - b.cos()).abs() < 1e-12);
            assert!((wignerd_little(1, 1, 0, b) + b.sin() / 2f64.sqrt()).abs() < 1e-12);
            assert!((wignerd_little(1, 1, 1, b) - (1.0 + b.cos()) / 2.0).abs() < 1e-12);
            assert!((wignerd_little(1, 1, -1, b) - (1.0 - b.cos()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn high_degree_orthogonal() {
        let l = 64;
        let n = 2 * l + 1;
        let d = wignerd_matrix(l, 0.7);
        for r in 0..n {
            for c in 0..n {
                let s: f64 = (0..n).map(|k| d[r * n + k] * d[c * n + k]).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-9);
            }
        }
    }
}

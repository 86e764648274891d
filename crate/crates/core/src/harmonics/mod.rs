//! Complex spherical harmonics and everything built directly on them.

mod legendre;
mod wigner3j;
mod wignerd;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

pub use legendre::{legendre_column, legendre_polynomials, legendre_table, normalized_legendre};
pub(crate) use legendre::tri_index;
pub use wigner3j::{wigner3j, wigner3j_range, Wigner3jQuery};
pub use wignerd::{rotate_spectral, wignerd_little, wignerd_matrix, SpectralRotator};

use crate::error::{Result, SlepError};
use crate::quadrature::EquiangularGrid;
use crate::sphgeom::SphPoint;

/// Flat position of `(l, m)`: `l² + l + m`.
#[inline]
pub fn flat_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Checked form of [`flat_index`].
pub fn try_flat_index(l: usize, m: i64) -> Result<usize> {
    if m.unsigned_abs() as usize > l {
        return Err(SlepError::OrderExceedsDegree {
            l: l as i64,
            m,
        });
    }
    Ok(flat_index(l, m))
}

/// `(l, m)` for a flat position.
pub fn inverse_index(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt() as usize;
    // guard against rounding at perfect squares
    let l = if (l + 1) * (l + 1) <= idx {
        l + 1
    } else if l * l > idx {
        l - 1
    } else {
        l
    };
    (l, idx as i64 - (l * l + l) as i64)
}

/// Band-limited coefficients `(f)_l^m`, `0 <= l < L`, in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVector {
    band_limit: usize,
    coeffs: Vec<Complex64>,
}

impl SpectralVector {
    pub fn zeros(band_limit: usize) -> Self {
        SpectralVector {
            band_limit,
            coeffs: vec![Complex64::new(0.0, 0.0); band_limit * band_limit],
        }
    }

    pub fn from_coeffs(band_limit: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != band_limit * band_limit {
            return Err(SlepError::LengthMismatch {
                expected: band_limit * band_limit,
                got: coeffs.len(),
            });
        }
        Ok(SpectralVector { band_limit, coeffs })
    }

    /// The unit vector selecting a single harmonic.
    pub fn unit(band_limit: usize, l: usize, m: i64) -> Result<Self> {
        if l >= band_limit {
            return Err(SlepError::IndexOutOfRange(format!(
                "degree {l} not below band-limit {band_limit}"
            )));
        }
        let mut v = SpectralVector::zeros(band_limit);
        v.coeffs[try_flat_index(l, m)?] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn get(&self, l: usize, m: i64) -> Complex64 {
        self.coeffs[flat_index(l, m)]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self, other> = Σ self · conj(other)`, the full-sphere inner product.
    pub fn inner(&self, other: &SpectralVector) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scaled(&self, s: Complex64) -> SpectralVector {
        SpectralVector {
            band_limit: self.band_limit,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Coefficients in the real orthonormal harmonic basis
    /// (`√2 (-1)^m Re Y_l^m` for `m > 0`, `√2 (-1)^m Im Y_l^{|m|}` for `m < 0`).
    /// Real signals give real output.
    pub fn to_real_basis(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        for l in 0..self.band_limit {
            out[flat_index(l, 0)] = self.get(l, 0);
            for m in 1..=l as i64 {
                let sg = if m % 2 == 1 { -1.0 } else { 1.0 };
                let (p, n) = (self.get(l, m) * sg, self.get(l, -m));
                out[flat_index(l, m)] = (p + n) * r2;
                out[flat_index(l, -m)] = (p - n) * Complex64::new(0.0, r2);
            }
        }
        out
    }
}

/// `Y_l^m(θ, φ) = N_l^m P_l^m(cos θ) e^{imφ}`, extended to negative orders
/// by `Y_l^{-m} = (-1)^m conj(Y_l^m)`.
pub fn ylm(l: usize, m: i64, p: &SphPoint) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(SlepError::OrderExceedsDegree { l: l as i64, m });
    }
    let ma = m.unsigned_abs() as usize;
    let plm = normalized_legendre(l, ma, p.theta.cos())?;
    let y = Complex64::from_polar(plm, ma as f64 * p.phi);
    Ok(if m < 0 {
        if ma % 2 == 1 {
            -y.conj()
        } else {
            y.conj()
        }
    } else {
        y
    })
}

/// Evaluates `Σ (f)_l^m Y_l^m` at each point.
pub fn synthesize(v: &SpectralVector, points: &[SphPoint]) -> Vec<Complex64> {
    let big_l = v.band_limit();
    points
        .par_iter()
        .map_init(Vec::new, |table, p| {
            legendre_table(big_l, p.theta.cos(), table);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..big_l {
                let e = Complex64::from_polar(1.0, m as f64 * p.phi);
                let mut pos = Complex64::new(0.0, 0.0);
                let mut neg = Complex64::new(0.0, 0.0);
                for l in m..big_l {
                    let plm = table[tri_index(l, m)];
                    pos += v.coeffs[flat_index(l, m as i64)] * plm;
                    if m > 0 {
                        neg += v.coeffs[flat_index(l, -(m as i64))] * plm;
                    }
                }
                acc += pos * e;
                if m > 0 {
                    let sg = if m % 2 == 1 { -1.0 } else { 1.0 };
                    acc += neg * e.conj() * sg;
                }
            }
            acc
        })
        .collect()
}

/// Per-ring Fourier coefficients `a_m = Σ_l (f)_l^m P̄_l^m(cos θ_j)` for
/// `m = -(L-1)..=L-1`, stored at `m + L - 1`.
fn ring_orders(v: &SpectralVector, table: &[f64], out: &mut [Complex64]) {
    let big_l = v.band_limit();
    for m in 0..big_l {
        let mut pos = Complex64::new(0.0, 0.0);
        let mut neg = Complex64::new(0.0, 0.0);
        for l in m..big_l {
            let plm = table[tri_index(l, m)];
            pos += v.coeffs[flat_index(l, m as i64)] * plm;
            if m > 0 {
                neg += v.coeffs[flat_index(l, -(m as i64))] * plm;
            }
        }
        out[big_l - 1 + m] = pos;
        if m > 0 {
            let sg = if m % 2 == 1 { -1.0 } else { 1.0 };
            out[big_l - 1 - m] = neg * sg;
        }
    }
}

/// Synthesis on every sample of an equiangular grid, ring by ring.
pub fn synthesize_grid(v: &SpectralVector, grid: &EquiangularGrid) -> Vec<Complex64> {
    let big_l = v.band_limit();
    let n_phi = grid.n_phi();
    let twiddle: Vec<Complex64> = (0..n_phi)
        .map(|k| Complex64::from_polar(1.0, grid.phis()[k]))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    out.par_chunks_mut(n_phi)
        .enumerate()
        .for_each_init(
            || (Vec::new(), vec![Complex64::new(0.0, 0.0); 2 * big_l.max(1) - 1]),
            |(table, orders), (j, ring)| {
                legendre_table(big_l, grid.thetas()[j].cos(), table);
                ring_orders(v, table, orders);
                for (k, slot) in ring.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let base = twiddle[k];
                    // e^{imφ} for m = -(L-1)..: start at e^{-i(L-1)φ}
                    let mut e = base.conj().powu(big_l.saturating_sub(1) as u32);
                    for a in orders.iter() {
                        acc += a * e;
                        e *= base;
                    }
                    *slot = acc;
                }
            },
        );
    out
}

/// Coefficients `<f, Y_l^m>` from grid samples by the grid quadrature.
pub fn analyze(samples: &[Complex64], grid: &EquiangularGrid, band_limit: usize) -> Result<SpectralVector> {
    if samples.len() != grid.len() {
        return Err(SlepError::LengthMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let need = 2 * band_limit;
    if grid.n_theta() < need || grid.n_phi() < 2 * band_limit - 1 {
        return Err(SlepError::GridUnderResolved {
            rings: grid.n_theta(),
            l: band_limit,
            need,
        });
    }
    let n_phi = grid.n_phi();
    let big_l = band_limit;
    // per ring: b_m = w_j Σ_k f_jk e^{-imφ_k} for m = 0..L, then project
    let partial: Vec<Vec<Complex64>> = samples
        .par_chunks(n_phi)
        .enumerate()
        .map_init(Vec::new, |table, (j, ring)| {
            let w = grid.ring_weight(j);
            let mut b = vec![Complex64::new(0.0, 0.0); 2 * big_l - 1];
            for (k, f) in ring.iter().enumerate() {
                let base = Complex64::from_polar(1.0, -grid.phis()[k]);
                let mut e = Complex64::new(1.0, 0.0);
                b[big_l - 1] += f;
                for m in 1..big_l {
                    e *= base;
                    b[big_l - 1 + m] += f * e;
                    b[big_l - 1 - m] += f * e.conj();
                }
            }
            legendre_table(big_l, grid.thetas()[j].cos(), table);
            let mut out = vec![Complex64::new(0.0, 0.0); big_l * big_l];
            for l in 0..big_l {
                for m in 0..=l {
                    let plm = table[tri_index(l, m)] * w;
                    out[flat_index(l, m as i64)] = b[big_l - 1 + m] * plm;
                    if m > 0 {
                        let sg = if m % 2 == 1 { -1.0 } else { 1.0 };
                        out[flat_index(l, -(m as i64))] = b[big_l - 1 - m] * (plm * sg);
                    }
                }
            }
            out
        })
        .collect();
    let mut acc = vec![Complex64::new(0.0, 0.0); big_l * big_l];
    for ring in &partial {
        for (a, r) in acc.iter_mut().zip(ring) {
            *a += r;
        }
    }
    SpectralVector::from_coeffs(big_l, acc)
}

/// `1 / sqrt(4π)`, the value of `Y_0^0`.
pub fn y00() -> f64 {
    (4.0 * PI).sqrt().recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        assert_eq!(flat_index(0, 0), 0);
        assert_eq!(flat_index(1, -1), 1);
        assert_eq!(flat_index(2, -2), 4);
        assert!(try_flat_index(1, 2).is_err());
        for idx in 0..2000 {
            let (l, m) = inverse_index(idx);
            assert_eq!(flat_index(l, m), idx);
        }
    }

    #[test]
    fn ylm_examples() {
        let p = SphPoint::new(1.1, 0.4);
        assert!((ylm(0, 0, &p).unwrap().re - y00()).abs() < 1e-15);
        let eq = SphPoint::new(PI / 2.0, 2.0);
        assert!(ylm(1, 0, &eq).unwrap().norm() < 1e-16);
        assert!(ylm(1, 2, &eq).is_err());
    }

    #[test]
    fn real_basis_of_real_signal_is_real() {
        let mut v = SpectralVector::zeros(4);
        v.coeffs_mut()[flat_index(2, 1)] = Complex64::new(0.3, -0.2);
        v.coeffs_mut()[flat_index(2, -1)] = Complex64::new(-0.3, -0.2);
        v.coeffs_mut()[flat_index(0, 0)] = Complex64::new(1.0, 0.0);
        let r = v.to_real_basis();
        assert!(r.iter().all(|c| c.im.abs() < 1e-15));
        let n: f64 = r.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((n - v.norm()).abs() < 1e-14);
    }
}

//! The polar-cap concentration problem.
//!
//! The cap matrix is block diagonal in the order `m`; each block has the
//! closed form
//!
//! ```text
//! C_{lm,pm} = (-1)^m sqrt((2l+1)(2p+1))/2
//!             Σ_n (l n p; 0 0 0)(l n p; m 0 -m) [P_{n-1}(cos Θ) - P_{n+1}(cos Θ)]
//! ```
//!
//! with `P_{-1} = 1`. The `m > 0` blocks serve both `+m` and `-m`.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SlepError};
use crate::harmonics::{flat_index, legendre_column, legendre_polynomials, wigner3j_range, SpectralVector};
use crate::linalg::{normalize_sign, symmetric_eig_desc};
use crate::quadrature::EquiangularGrid;

/// Eigenvalues beyond this distance outside `[0, 1]` are reported as errors.
const EIG_GUARD: f64 = 1e-10;

/// `N_Θ = (1 - cos Θ) L² / 2` and its ceiling.
pub fn cap_shannon(band_limit: usize, theta: f64) -> (f64, usize) {
    let n = (1.0 - theta.cos()) / 2.0 * (band_limit * band_limit) as f64;
    // values within rounding of an integer are not bumped to the next one
    let r = n.round();
    let keep = if (n - r).abs() < 1e-9 * n.max(1.0) { r } else { n.ceil() };
    (n, keep as usize)
}

/// One order block `C^(m)` over degrees `l = m..L-1`, row-major.
#[derive(Debug, Clone)]
pub struct CapBlock {
    pub order_m: usize,
    pub size: usize,
    pub matrix: Vec<f64>,
}

impl CapBlock {
    pub fn get(&self, l: usize, p: usize) -> f64 {
        self.matrix[(l - self.order_m) * self.size + (p - self.order_m)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.size).map(|i| self.matrix[i * self.size + i]).sum()
    }
}

/// Builds `C^(m)` from the 3j closed form.
pub fn cap_block(band_limit: usize, m: usize, theta: f64) -> Result<CapBlock> {
    if m >= band_limit {
        return Err(SlepError::IndexOutOfRange(format!(
            "order {m} not below band-limit {band_limit}"
        )));
    }
    let x = theta.cos();
    let pn = legendre_polynomials(2 * band_limit + 1, x);
    let diff = |n: usize| if n == 0 { 1.0 - x } else { pn[n - 1] - pn[n + 1] };
    let size = band_limit - m;
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    let mi = m as i64;

    let rows: Vec<Vec<f64>> = (m..band_limit)
        .into_par_iter()
        .map(|l| {
            let mut row = vec![0.0; size];
            for p in l..band_limit {
                let (j0, zero) = wigner3j_range(l as i64, p as i64, 0, 0);
                let (j1, ord) = wigner3j_range(l as i64, p as i64, mi, -mi);
                let nmin = j0.max(j1);
                let mut s = 0.0;
                let mut n = nmin;
                // (l n p; 0 0 0) vanishes unless l + n + p is even
                if (l as i64 + n + p as i64) % 2 == 1 {
                    n += 1;
                }
                while n <= (l + p) as i64 {
                    let a = zero[(n - j0) as usize];
                    let b = ord[(n - j1) as usize];
                    s += a * b * diff(n as usize);
                    n += 2;
                }
                row[p - m] = sign * (((2 * l + 1) * (2 * p + 1)) as f64).sqrt() / 2.0 * s;
            }
            row
        })
        .collect();

    let mut matrix = vec![0.0; size * size];
    for (i, row) in rows.iter().enumerate() {
        for j in i..size {
            matrix[i * size + j] = row[j];
            matrix[j * size + i] = row[j];
        }
    }
    Ok(CapBlock {
        order_m: m,
        size,
        matrix,
    })
}

/// How many cap functions keep their coefficient vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    All,
    Concentrated,
    Count(usize),
}

/// One cap Slepian function: order `m` (signed) and the degree profile
/// `c_l`, `l = |m|..L-1`. The `-m` member of a pair carries coefficients
/// `(-1)^m c_l` on `Y_l^{-m}`, i.e. it is the complex conjugate of the `+m`
/// function.
#[derive(Debug, Clone)]
pub struct CapFunction {
    pub m: i64,
    pub lambda: f64,
    block: usize,
    column: usize,
}

#[derive(Debug, Clone)]
pub struct CapSlepianBasis {
    band_limit: usize,
    theta: f64,
    shannon: f64,
    kept: usize,
    /// All `L²` functions in concentration order, with coefficients for the
    /// first `retained`.
    functions: Vec<CapFunction>,
    retained: usize,
    /// Eigenvectors per order block, column-major `size x size`.
    profiles: Vec<Vec<f64>>,
}

/// Solves every order block and sorts the functions by
/// `(λ desc, |m| asc, column, +m before -m)`; the column key only matters
/// when clamping makes eigenvalues tie exactly and keeps pairs adjacent.
pub fn solve_cap(band_limit: usize, theta: f64, keep: Keep) -> Result<CapSlepianBasis> {
    if band_limit == 0 {
        return Err(SlepError::InvalidArgument("band-limit must be positive".into()));
    }
    if !(theta > 0.0 && theta <= std::f64::consts::PI) {
        return Err(SlepError::InvalidArgument(format!("cap radius {theta} outside (0, pi]")));
    }
    let solved: Vec<(Vec<f64>, Vec<f64>)> = (0..band_limit)
        .into_par_iter()
        .map(|m| -> Result<(Vec<f64>, Vec<f64>)> {
            let blk = cap_block(band_limit, m, theta)?;
            let n = blk.size;
            let a = Mat::<f64>::from_fn(n, n, |i, j| blk.matrix[i * n + j]);
            let (vals, vecs) = symmetric_eig_desc(a.as_ref())?;
            let mut out = vec![0.0; n * n];
            for k in 0..n {
                let col = &mut out[k * n..(k + 1) * n];
                for i in 0..n {
                    col[i] = vecs[(i, k)];
                }
                normalize_sign(col);
            }
            Ok((vals, out))
        })
        .collect::<Result<_>>()?;

    let mut functions = Vec::with_capacity(band_limit * band_limit);
    let mut profiles = Vec::with_capacity(band_limit);
    for (m, (vals, vecs)) in solved.into_iter().enumerate() {
        for (k, &v) in vals.iter().enumerate() {
            if !(-EIG_GUARD..=1.0 + EIG_GUARD).contains(&v) {
                return Err(SlepError::Eigen(format!(
                    "cap eigenvalue {v} outside [0, 1] for order {m}"
                )));
            }
            let lambda = v.clamp(0.0, 1.0);
            functions.push(CapFunction {
                m: m as i64,
                lambda,
                block: m,
                column: k,
            });
            if m > 0 {
                functions.push(CapFunction {
                    m: -(m as i64),
                    lambda,
                    block: m,
                    column: k,
                });
            }
        }
        profiles.push(vecs);
    }
    functions.sort_by(|a, b| {
        b.lambda
            .total_cmp(&a.lambda)
            .then(a.m.abs().cmp(&b.m.abs()))
            .then(a.column.cmp(&b.column))
            .then(b.m.cmp(&a.m))
    });

    let (shannon, n_keep) = cap_shannon(band_limit, theta);
    let total = band_limit * band_limit;
    let (kept, retained) = match keep {
        Keep::All => (n_keep.min(total), total),
        Keep::Concentrated => (n_keep.min(total), n_keep.min(total)),
        Keep::Count(c) => (c.min(total), c.min(total)),
    };
    Ok(CapSlepianBasis {
        band_limit,
        theta,
        shannon,
        kept,
        functions,
        retained,
        profiles,
    })
}

impl CapSlepianBasis {
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `N_Θ`.
    pub fn shannon(&self) -> f64 {
        self.shannon
    }

    /// Number of functions used downstream (`⌈N_Θ⌉` unless overridden).
    pub fn kept(&self) -> usize {
        self.kept
    }

    /// Number of functions whose coefficients are available.
    pub fn retained(&self) -> usize {
        self.retained
    }

    /// All `L²` eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.functions.iter().map(|f| f.lambda).collect()
    }

    pub fn functions(&self) -> &[CapFunction] {
        &self.functions
    }

    /// Degree profile `c_l` for `l = |m|..L-1` of function `alpha`.
    pub fn profile(&self, alpha: usize) -> &[f64] {
        let f = &self.functions[alpha];
        let n = self.band_limit - f.block;
        &self.profiles[f.block][f.column * n..(f.column + 1) * n]
    }

    fn check_retained(&self, alpha: usize) -> Result<()> {
        if alpha >= self.retained {
            return Err(SlepError::IndexOutOfRange(format!(
                "cap function {alpha} not retained (have {})",
                self.retained
            )));
        }
        Ok(())
    }

    /// Full coefficient vector of function `alpha` (0-based rank).
    pub fn vector(&self, alpha: usize) -> Result<SpectralVector> {
        self.check_retained(alpha)?;
        let f = &self.functions[alpha];
        let ma = f.m.unsigned_abs() as usize;
        let sg = if f.m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
        let mut v = SpectralVector::zeros(self.band_limit);
        for (i, c) in self.profile(alpha).iter().enumerate() {
            v.coeffs_mut()[flat_index(ma + i, f.m)] = Complex64::new(sg * c, 0.0);
        }
        Ok(v)
    }

    /// `<h, g_alpha>` for every retained function.
    pub fn expansion(&self, h: &SpectralVector) -> Result<Vec<Complex64>> {
        if h.band_limit() != self.band_limit {
            return Err(SlepError::BandLimitMismatch(h.band_limit(), self.band_limit));
        }
        Ok((0..self.retained)
            .map(|alpha| {
                let f = &self.functions[alpha];
                let ma = f.m.unsigned_abs() as usize;
                let sg = if f.m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
                self.profile(alpha)
                    .iter()
                    .enumerate()
                    .map(|(i, c)| h.get(ma + i, f.m) * (sg * c))
                    .sum()
            })
            .collect())
    }

    /// `Σ_α f_α g_α` over the first `coeffs.len()` functions.
    pub fn combine(&self, coeffs: &[Complex64]) -> Result<SpectralVector> {
        if coeffs.len() > self.retained {
            self.check_retained(coeffs.len() - 1)?;
        }
        let mut v = SpectralVector::zeros(self.band_limit);
        for (alpha, a) in coeffs.iter().enumerate() {
            let f = &self.functions[alpha];
            let ma = f.m.unsigned_abs() as usize;
            let sg = if f.m < 0 && ma % 2 == 1 { -1.0 } else { 1.0 };
            for (i, c) in self.profile(alpha).iter().enumerate() {
                v.coeffs_mut()[flat_index(ma + i, f.m)] += a * (sg * c);
            }
        }
        Ok(v)
    }

    /// The radial parts `R_α(θ)` of the first `count` functions at each
    /// colatitude, with `s_α(θ, φ) = R_α(θ) e^{i m_α φ}`. Row-major
    /// `thetas.len() x count`.
    pub(crate) fn radial_table(&self, count: usize, thetas: &[f64]) -> Vec<f64> {
        let big_l = self.band_limit;
        let mut orders: Vec<usize> = self.functions[..count]
            .iter()
            .map(|f| f.m.unsigned_abs() as usize)
            .collect();
        orders.sort_unstable();
        orders.dedup();
        let mut out = vec![0.0; thetas.len() * count];
        out.par_chunks_mut(count.max(1))
            .zip(thetas.par_iter())
            .for_each_init(
                || vec![0.0; big_l],
                |col, (row, &t)| {
                    let x = t.cos();
                    let mut by_order = vec![Vec::new(); big_l];
                    for &m in &orders {
                        legendre_column(m, big_l - 1, x, col);
                        by_order[m] = col[..big_l - m].to_vec();
                    }
                    for (alpha, slot) in row.iter_mut().enumerate() {
                        let f = &self.functions[alpha];
                        let ma = f.m.unsigned_abs() as usize;
                        *slot = self
                            .profile(alpha)
                            .iter()
                            .zip(&by_order[ma])
                            .map(|(c, p)| c * p)
                            .sum();
                    }
                },
            );
        out
    }
}

/// Spatial values of the first `count` functions on the whole grid,
/// row-major `count x M`.
pub fn evaluate_cap_basis(basis: &CapSlepianBasis, grid: &EquiangularGrid, count: usize) -> Result<Vec<Complex64>> {
    if count > basis.retained {
        basis.check_retained(count - 1)?;
    }
    let radial = basis.radial_table(count, grid.thetas());
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let mut out = vec![Complex64::new(0.0, 0.0); count * grid.len()];
    out.par_chunks_mut(grid.len().max(1))
        .enumerate()
        .for_each(|(alpha, row)| {
            let m = basis.functions[alpha].m as f64;
            for (j, ring) in row.chunks_mut(np).enumerate().take(nt) {
                let r = radial[j * count + alpha];
                for (k, v) in ring.iter_mut().enumerate() {
                    *v = Complex64::from_polar(r, m * grid.phis()[k]);
                }
            }
        });
    Ok(out)
}

//! The conventional dense method: `K_{lm,pq} = ∫_R conj(Y_l^m) Y_p^q` by
//! quadrature and its full eigendecomposition.

use std::time::Instant;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SlepError};
use crate::harmonics::{flat_index, legendre_table, tri_index, SpectralVector};
use crate::linalg::{gram, hermitian_eig_desc, hermitize, normalize_phase};
use crate::quadrature::{EquiangularGrid, RegionMask};
use crate::sphgeom::Region;

pub const DEFAULT_MEMORY_LIMIT_L: usize = 256;

/// Eigenvalues below `-PSD_GUARD` mean the quadrature is broken.
pub const PSD_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct ConventionalOptions {
    pub grid_res: usize,
    pub memory_limit_l: usize,
}

impl Default for ConventionalOptions {
    fn default() -> Self {
        ConventionalOptions {
            grid_res: 1,
            memory_limit_l: DEFAULT_MEMORY_LIMIT_L,
        }
    }
}

/// Wall-clock seconds spent assembling the matrix and decomposing it.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub matrix: f64,
    pub eig: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.matrix + self.eig
    }
}

#[derive(Debug, Clone)]
pub struct FullBasis {
    pub band_limit: usize,
    /// Descending, clamped to `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<SpectralVector>,
    /// `tr K` before clamping.
    pub trace: f64,
    pub grid_res: usize,
    pub masked_samples: usize,
    pub timings: PhaseTimings,
}

/// Weight-scaled harmonic samples: column `i` holds
/// `sqrt(w_i) Y_l^m(x_i)` for the `i`-th masked sample, column-major
/// `L² x M_masked`.
pub(crate) fn weighted_harmonics(band_limit: usize, grid: &EquiangularGrid, indices: &[usize]) -> Vec<Complex64> {
    let n = band_limit * band_limit;
    let mut buf = vec![Complex64::new(0.0, 0.0); n * indices.len()];
    // group consecutive samples of the same ring so the Legendre table is shared
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (pos, &i) in indices.iter().enumerate() {
        let ring = i / grid.n_phi();
        match runs.last_mut() {
            Some((start, len)) if indices[*start] / grid.n_phi() == ring => *len += 1,
            _ => runs.push((pos, 1)),
        }
    }
    let mut slices: Vec<&mut [Complex64]> = Vec::with_capacity(runs.len());
    let mut rest: &mut [Complex64] = &mut buf;
    for &(_, len) in &runs {
        let (a, b) = rest.split_at_mut(len * n);
        slices.push(a);
        rest = b;
    }
    slices
        .into_par_iter()
        .zip(runs.par_iter())
        .for_each_init(Vec::new, |table, (chunk, &(start, len))| {
            let ring = indices[start] / grid.n_phi();
            legendre_table(band_limit, grid.thetas()[ring].cos(), table);
            let sw = grid.ring_weight(ring).sqrt();
            for (s, col) in chunk.chunks_mut(n).enumerate().take(len) {
                let phi = grid.phis()[indices[start + s] % grid.n_phi()];
                let base = Complex64::from_polar(1.0, phi);
                let mut e = Complex64::new(1.0, 0.0);
                for m in 0..band_limit {
                    let sg = if m % 2 == 1 { -1.0 } else { 1.0 };
                    for l in m..band_limit {
                        let p = table[tri_index(l, m)] * sw;
                        col[flat_index(l, m as i64)] = e * p;
                        if m > 0 {
                            col[flat_index(l, -(m as i64))] = e.conj() * (p * sg);
                        }
                    }
                    e *= base;
                }
            }
        });
    buf
}

/// Assembles `K` over the masked samples of `grid`.
pub fn build_k(band_limit: usize, grid: &EquiangularGrid, mask: &RegionMask, memory_limit_l: usize) -> Result<Mat<Complex64>> {
    if band_limit > memory_limit_l {
        return Err(SlepError::MemoryLimit {
            l: band_limit,
            limit: memory_limit_l,
        });
    }
    if grid.n_theta() < 2 * band_limit {
        return Err(SlepError::GridUnderResolved {
            rings: grid.n_theta(),
            l: band_limit,
            need: 2 * band_limit,
        });
    }
    if mask.inside().len() != grid.len() {
        return Err(SlepError::LengthMismatch {
            expected: grid.len(),
            got: mask.inside().len(),
        });
    }
    let idx = mask.indices();
    if idx.is_empty() {
        return Err(SlepError::EmptyMask);
    }
    let n = band_limit * band_limit;
    let z = weighted_harmonics(band_limit, grid, &idx);
    let zt = MatRef::from_column_major_slice(&z, n, idx.len());
    let mut k = gram(zt.transpose());
    let fix = hermitize(&mut k);
    if fix > 1e-10 {
        return Err(SlepError::Eigen(format!("K not Hermitian: correction {fix:e}")));
    }
    Ok(k)
}

/// `N = tr K`.
pub fn shannon_number(k: MatRef<'_, Complex64>) -> f64 {
    (0..k.nrows()).map(|i| k[(i, i)].re).sum()
}

/// `(A / 4π) L²`.
pub fn analytic_shannon(area: f64, band_limit: usize) -> f64 {
    area / (4.0 * std::f64::consts::PI) * (band_limit * band_limit) as f64
}

/// Decomposes `K` and fixes the phase of every eigenvector.
pub fn solve_conventional_masked(
    band_limit: usize,
    grid: &EquiangularGrid,
    mask: &RegionMask,
    memory_limit_l: usize,
) -> Result<FullBasis> {
    let t0 = Instant::now();
    let k = build_k(band_limit, grid, mask, memory_limit_l)?;
    let t_matrix = t0.elapsed().as_secs_f64();
    let trace = shannon_number(k.as_ref());
    let t1 = Instant::now();
    let (vals, vecs) = hermitian_eig_desc(k.as_ref())?;
    drop(k);
    let n = band_limit * band_limit;
    let vectors: Vec<SpectralVector> = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut col: Vec<Complex64> = (0..n).map(|i| vecs[(i, c)]).collect();
            normalize_phase(&mut col);
            SpectralVector::from_coeffs(band_limit, col).expect("length L²")
        })
        .collect();
    let t_eig = t1.elapsed().as_secs_f64();
    let eigenvalues = clamp_eigenvalues(&vals)?;
    Ok(FullBasis {
        band_limit,
        eigenvalues,
        vectors,
        trace,
        grid_res: 0,
        masked_samples: mask.count(),
        timings: PhaseTimings {
            matrix: t_matrix,
            eig: t_eig,
        },
    })
}

pub(crate) fn clamp_eigenvalues(vals: &[f64]) -> Result<Vec<f64>> {
    if let Some(&v) = vals.iter().find(|v| **v < -PSD_GUARD) {
        return Err(SlepError::NegativeEigenvalue {
            value: v,
            guard: -PSD_GUARD,
        });
    }
    Ok(vals.iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// The conventional basis of `region` on a grid of the given resolution.
pub fn solve_conventional(band_limit: usize, region: &Region, opts: &ConventionalOptions) -> Result<FullBasis> {
    if band_limit > opts.memory_limit_l {
        return Err(SlepError::MemoryLimit {
            l: band_limit,
            limit: opts.memory_limit_l,
        });
    }
    let t0 = Instant::now();
    let grid = EquiangularGrid::build(opts.grid_res, band_limit)?;
    let mask = RegionMask::for_region(&grid, region);
    let setup = t0.elapsed().as_secs_f64();
    let mut basis = solve_conventional_masked(band_limit, &grid, &mask, opts.memory_limit_l)?;
    basis.timings.matrix += setup;
    basis.grid_res = opts.grid_res;
    Ok(basis)
}

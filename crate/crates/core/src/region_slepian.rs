//! The reduced method: expand in the truncated Slepian basis of an
//! enclosing cap, solve the small concentration problem there and rotate
//! the result back.

use std::time::Instant;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SlepError};
use crate::linalg::{gram, hermitian_eig_desc, hermitize, normalize_phase};
use crate::polarcap::{solve_cap, CapSlepianBasis, Keep};
use crate::quadrature::{EquiangularGrid, RegionMask};
use crate::reference::{clamp_eigenvalues, solve_conventional, ConventionalOptions, PhaseTimings};
use crate::harmonics::{SpectralRotator, SpectralVector};
use crate::sphgeom::{enclosing_cap, pole_alignment, rotate_region, Cap, EulerZYZ, Region, SphPoint};

/// Caps covering more than this fraction of the sphere are not worth reducing.
pub const FALLBACK_FRACTION: f64 = 0.99;

#[derive(Debug, Clone, Copy)]
pub struct RegionOptions {
    pub grid_res: usize,
    pub keep_override: Option<usize>,
    pub memory_limit_l: usize,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions {
            grid_res: 1,
            keep_override: None,
            memory_limit_l: crate::reference::DEFAULT_MEMORY_LIMIT_L,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Reduced,
    /// The cap was too large and the dense method ran instead.
    ConventionalFallback,
}

#[derive(Debug, Clone)]
pub struct RegionSlepianBasis {
    pub band_limit: usize,
    pub cap: Cap,
    pub euler_to_pole: EulerZYZ,
    pub method: Method,
    /// Descending, clamped to `[0, 1]`.
    pub eigenvalues: Vec<f64>,
    /// Cap-basis coefficients per eigenvector. For the fallback these are
    /// the spectral coefficients themselves.
    pub reduced: Vec<Vec<Complex64>>,
    /// Reconstructed coefficients in the original orientation.
    pub spectral: Vec<SpectralVector>,
    /// `tr P`.
    pub n_p: f64,
    pub n_keep: usize,
    pub cap_shannon: f64,
    pub grid_res: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub masked_samples: usize,
    pub timings: PhaseTimings,
    /// The full cap basis (all `L²` functions), absent for the fallback.
    pub cap_basis: Option<CapSlepianBasis>,
}

/// Scaled samples `sqrt(w_i) s_α(x_i)` of the first `count` cap functions at
/// the given grid samples, column-major `count x indices.len()`.
fn weighted_cap_samples(basis: &CapSlepianBasis, count: usize, grid: &EquiangularGrid, indices: &[usize]) -> Vec<Complex64> {
    let np = grid.n_phi();
    let mut rings: Vec<usize> = indices.iter().map(|i| i / np).collect();
    rings.dedup();
    let thetas: Vec<f64> = rings.iter().map(|&j| grid.thetas()[j]).collect();
    let radial = basis.radial_table(count, &thetas);
    let mut ring_pos = vec![usize::MAX; grid.n_theta()];
    for (p, &j) in rings.iter().enumerate() {
        ring_pos[j] = p;
    }
    let orders: Vec<f64> = basis.functions()[..count].iter().map(|f| f.m as f64).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); count * indices.len()];
    out.par_chunks_mut(count.max(1))
        .zip(indices.par_iter())
        .for_each(|(col, &i)| {
            let (j, k) = (i / np, i % np);
            let sw = grid.ring_weight(j).sqrt();
            let row = &radial[ring_pos[j] * count..(ring_pos[j] + 1) * count];
            let phi = grid.phis()[k];
            for a in 0..count {
                col[a] = Complex64::from_polar(row[a] * sw, orders[a] * phi);
            }
        });
    out
}

fn p_from_weighted(z: &[Complex64], count: usize, samples: usize) -> Result<Mat<Complex64>> {
    let zt = MatRef::from_column_major_slice(z, count, samples);
    let mut p = gram(zt.transpose());
    let fix = hermitize(&mut p);
    if fix > 1e-12 {
        return Err(SlepError::Eigen(format!("P not Hermitian: correction {fix:e}")));
    }
    Ok(p)
}

/// `P_{αβ} = Σ_masked w conj(s_α) s_β` from full-grid samples (row-major
/// `count x M`) of the cap functions.
pub fn build_p(cap_samples: &[Complex64], count: usize, grid: &EquiangularGrid, mask: &RegionMask) -> Result<Mat<Complex64>> {
    if cap_samples.len() != count * grid.len() {
        return Err(SlepError::LengthMismatch {
            expected: count * grid.len(),
            got: cap_samples.len(),
        });
    }
    let idx = mask.indices();
    if idx.is_empty() {
        return Err(SlepError::EmptyMask);
    }
    let m = grid.len();
    let mut z = vec![Complex64::new(0.0, 0.0); count * idx.len()];
    z.par_chunks_mut(count.max(1))
        .zip(idx.par_iter())
        .for_each(|(col, &i)| {
            let sw = grid.weight(i).sqrt();
            for a in 0..count {
                col[a] = cap_samples[a * m + i] * sw;
            }
        });
    p_from_weighted(&z, count, idx.len())
}

/// `N_P = tr P`.
pub fn shannon_from_trace(p: MatRef<'_, Complex64>) -> f64 {
    (0..p.nrows()).map(|i| p[(i, i)].re).sum()
}

/// `Σ_α f_α g_α`, rotated back from the cap frame.
pub fn reconstruct_spectral(
    reduced: &[Complex64],
    cap_basis: &CapSlepianBasis,
    euler_to_pole: &EulerZYZ,
    rotator: &SpectralRotator,
) -> Result<SpectralVector> {
    let local = cap_basis.combine(reduced)?;
    rotator.rotate(&local, &euler_to_pole.inverse())
}

fn fallback(band_limit: usize, region: &Region, opts: &RegionOptions) -> Result<RegionSlepianBasis> {
    log::warn!("enclosing cap covers more than {FALLBACK_FRACTION} of the sphere; using the conventional method");
    let full = solve_conventional(
        band_limit,
        region,
        &ConventionalOptions {
            grid_res: opts.grid_res,
            memory_limit_l: opts.memory_limit_l,
        },
    )?;
    let grid = EquiangularGrid::build(opts.grid_res, band_limit)?;
    let n = band_limit * band_limit;
    Ok(RegionSlepianBasis {
        band_limit,
        cap: Cap::new(SphPoint::NORTH, std::f64::consts::PI)?,
        euler_to_pole: EulerZYZ::IDENTITY,
        method: Method::ConventionalFallback,
        eigenvalues: full.eigenvalues,
        reduced: full.vectors.iter().map(|v| v.coeffs().to_vec()).collect(),
        spectral: full.vectors,
        n_p: full.trace,
        n_keep: n,
        cap_shannon: n as f64,
        grid_res: opts.grid_res,
        n_theta: grid.n_theta(),
        n_phi: grid.n_phi(),
        masked_samples: full.masked_samples,
        timings: full.timings,
        cap_basis: None,
    })
}

/// Runs the whole reduced pipeline for `region`.
pub fn solve_region(band_limit: usize, region: &Region, opts: &RegionOptions) -> Result<RegionSlepianBasis> {
    let t0 = Instant::now();
    let cap = enclosing_cap(region)?;
    if cap.radius_theta >= std::f64::consts::PI - 1e-12 {
        return Err(SlepError::RegionExceedsCap);
    }
    if cap.fraction() > FALLBACK_FRACTION {
        return fallback(band_limit, region, opts);
    }
    let euler = pole_alignment(&cap);
    let rotated = rotate_region(region, &euler);
    let basis = solve_cap(band_limit, cap.radius_theta, Keep::All)?;
    let n_keep = opts.keep_override.unwrap_or(basis.kept()).min(band_limit * band_limit);
    if n_keep == 0 {
        return Err(SlepError::InvalidArgument("cap basis truncated to zero functions".into()));
    }

    let grid = EquiangularGrid::build(opts.grid_res, band_limit)?;
    // a cap smaller than a hemisphere is convex, so only its rings can hold
    // masked samples
    let mut inside = vec![false; grid.len()];
    let np = grid.n_phi();
    let limit = if cap.radius_theta < std::f64::consts::FRAC_PI_2 {
        cap.radius_theta + 1e-9
    } else {
        f64::INFINITY
    };
    inside
        .par_chunks_mut(np)
        .enumerate()
        .filter(|(j, _)| grid.thetas()[*j] <= limit)
        .for_each(|(j, ring)| {
            for (k, v) in ring.iter_mut().enumerate() {
                *v = rotated.contains(&SphPoint::new(grid.thetas()[j], grid.phis()[k]));
            }
        });
    let mask = RegionMask::from_bools(inside);
    let idx = mask.indices();
    if idx.is_empty() {
        return Err(SlepError::EmptyMask);
    }
    let z = weighted_cap_samples(&basis, n_keep, &grid, &idx);
    let p = p_from_weighted(&z, n_keep, idx.len())?;
    drop(z);
    let n_p = shannon_from_trace(p.as_ref());
    let t_matrix = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let (vals, vecs) = hermitian_eig_desc(p.as_ref())?;
    let eigenvalues = clamp_eigenvalues(&vals)?;
    let rotator = SpectralRotator::new(band_limit);
    let (reduced, spectral): (Vec<Vec<Complex64>>, Vec<SpectralVector>) = (0..n_keep)
        .into_par_iter()
        .map(|c| -> Result<(Vec<Complex64>, SpectralVector)> {
            let mut col: Vec<Complex64> = (0..n_keep).map(|i| vecs[(i, c)]).collect();
            normalize_phase(&mut col);
            let s = reconstruct_spectral(&col, &basis, &euler, &rotator)?;
            Ok((col, s))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let t_eig = t1.elapsed().as_secs_f64();

    Ok(RegionSlepianBasis {
        band_limit,
        cap,
        euler_to_pole: euler,
        method: Method::Reduced,
        eigenvalues,
        reduced,
        spectral,
        n_p,
        n_keep,
        cap_shannon: basis.shannon(),
        grid_res: opts.grid_res,
        n_theta: grid.n_theta(),
        n_phi: grid.n_phi(),
        masked_samples: idx.len(),
        timings: PhaseTimings {
            matrix: t_matrix,
            eig: t_eig,
        },
        cap_basis: Some(basis),
    })
}

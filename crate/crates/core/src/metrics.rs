//! Quality and agreement measures between Slepian bases.

use num_complex::Complex64;

use crate::error::{Result, SlepError};
use crate::harmonics::{synthesize_grid, SpectralRotator, SpectralVector};
use crate::polarcap::CapSlepianBasis;
use crate::quadrature::{integrate_product, EquiangularGrid, RegionMask};
use crate::reference::FullBasis;
use crate::region_slepian::RegionSlepianBasis;
use crate::sphgeom::EulerZYZ;

/// Pairs whose overlap magnitude falls below this are flagged.
pub const OVERLAP_THRESHOLD: f64 = 0.5;

/// Floor for the dB field where the two functions agree exactly.
pub const DB_FLOOR: f64 = -200.0;

const ROUNDOFF: f64 = 1e-13;

/// Fraction of the energy of `v` inside the mask.
pub fn concentration_ratio(v: &SpectralVector, grid: &EquiangularGrid, mask: &RegionMask) -> Result<f64> {
    let total = v.norm().powi(2);
    if total == 0.0 {
        return Err(SlepError::ZeroVector);
    }
    let f = synthesize_grid(v, grid);
    Ok(integrate_product(&f, &f, grid, mask)?.re / total)
}

/// `Q = Σ_{α<n} λ_α |h_α|² / Σ_α λ_α |h_α|²` with `h_α = <h, g_α>`, for a
/// signal already expressed in the cap frame.
pub fn quality_factor(h: &SpectralVector, cap_basis: &CapSlepianBasis, n_keep: usize) -> Result<f64> {
    let total = cap_basis.band_limit().pow(2);
    if cap_basis.retained() < total {
        return Err(SlepError::InvalidArgument(format!(
            "quality factor needs the full cap basis, have {} of {total}",
            cap_basis.retained()
        )));
    }
    let coeffs = cap_basis.expansion(h)?;
    let lam = cap_basis.eigenvalues();
    // expansion coefficients at rounding level are treated as zero
    let floor = (ROUNDOFF * h.norm()).powi(2);
    let weighted: Vec<f64> = coeffs
        .iter()
        .zip(&lam)
        .map(|(c, l)| if c.norm_sqr() <= floor { 0.0 } else { l * c.norm_sqr() })
        .collect();
    let den: f64 = weighted.iter().sum();
    if den <= 0.0 {
        return Err(SlepError::OrthogonalToCapBasis);
    }
    let num: f64 = weighted[..n_keep.min(total)].iter().sum();
    Ok((num / den).clamp(0.0, 1.0))
}

/// `Q` of a signal given in the original orientation.
pub fn quality_factor_rotated(
    h: &SpectralVector,
    cap_basis: &CapSlepianBasis,
    euler_to_pole: &EulerZYZ,
    n_keep: usize,
    rotator: &SpectralRotator,
) -> Result<f64> {
    let local = rotator.rotate(h, euler_to_pole)?;
    quality_factor(&local, cap_basis, n_keep)
}

/// `(1/L²) Σ |f - h|` over all coefficients.
pub fn mean_coeff_diff(f: &SpectralVector, h: &SpectralVector) -> Result<f64> {
    if f.band_limit() != h.band_limit() {
        return Err(SlepError::BandLimitMismatch(f.band_limit(), h.band_limit()));
    }
    let n = f.coeffs().len();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(f.coeffs()
        .iter()
        .zip(h.coeffs())
        .map(|(a, b)| (a - b).norm())
        .sum::<f64>()
        / n as f64)
}

/// `10 log10 |h - f|` at every grid sample.
pub fn db_difference_field(f: &SpectralVector, h: &SpectralVector, grid: &EquiangularGrid) -> Result<Vec<f64>> {
    if f.band_limit() != h.band_limit() {
        return Err(SlepError::BandLimitMismatch(f.band_limit(), h.band_limit()));
    }
    let d = SpectralVector::from_coeffs(
        f.band_limit(),
        f.coeffs().iter().zip(h.coeffs()).map(|(a, b)| b - a).collect(),
    )?;
    Ok(synthesize_grid(&d, grid)
        .iter()
        .map(|v| {
            let a = v.norm();
            if a > 0.0 {
                (10.0 * a.log10()).max(DB_FLOOR)
            } else {
                DB_FLOOR
            }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct PairedFunction {
    /// Rank in the fast basis (0-based).
    pub a: usize,
    /// Rank of the matched reference function (0-based).
    pub alpha: usize,
    pub overlap: f64,
    /// `<f, h> / |<f, h>|`.
    pub phase: Complex64,
    pub lambda_fast: f64,
    pub lambda_ref: f64,
    pub abs_diff: f64,
    /// `None` when the pair is flagged.
    pub e_a: Option<f64>,
    /// Quality factor of the matched reference function.
    pub q: Option<f64>,
    pub flagged: bool,
    /// Phase-aligned fast function `f conj(phase)`.
    pub aligned: SpectralVector,
}

#[derive(Debug, Clone)]
pub struct BasisComparison {
    pub pairs: Vec<PairedFunction>,
}

impl BasisComparison {
    pub fn max_abs_diff(&self, first: usize) -> f64 {
        self.pairs.iter().take(first).map(|p| p.abs_diff).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &PairedFunction> {
        self.pairs.iter().filter(|p| p.flagged)
    }
}

/// Greedy pairing in fast-basis order: each `f_a` takes the unused
/// reference function among the first `n` with the largest `|<f_a, h_α>|`.
pub fn pair_vectors(
    fast: &[SpectralVector],
    fast_lambda: &[f64],
    reference: &[SpectralVector],
    ref_lambda: &[f64],
    n: usize,
) -> Result<BasisComparison> {
    let n = n.min(fast.len()).min(reference.len());
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n);
    for a in 0..n {
        let f = &fast[a];
        let mut best: Option<(usize, Complex64)> = None;
        for (alpha, h) in reference.iter().enumerate().take(n) {
            if used[alpha] {
                continue;
            }
            let ip = f.inner(h);
            if best.map_or(true, |(_, b)| ip.norm() > b.norm()) {
                best = Some((alpha, ip));
            }
        }
        let (alpha, ip) = best.expect("n unused candidates remain");
        used[alpha] = true;
        let overlap = ip.norm();
        let phase = if overlap > 0.0 {
            ip / overlap
        } else {
            Complex64::new(1.0, 0.0)
        };
        let aligned = f.scaled(phase.conj());
        let flagged = overlap < OVERLAP_THRESHOLD;
        let e_a = if flagged {
            None
        } else {
            Some(mean_coeff_diff(&aligned, &reference[alpha])?)
        };
        pairs.push(PairedFunction {
            a,
            alpha,
            overlap,
            phase,
            lambda_fast: fast_lambda[a],
            lambda_ref: ref_lambda[alpha],
            abs_diff: (fast_lambda[a] - ref_lambda[alpha]).abs(),
            e_a,
            q: None,
            flagged,
            aligned,
        });
    }
    Ok(BasisComparison { pairs })
}

/// Pairs the fast basis against the reference over the first `n_keep`
/// functions and fills in the quality factor of every matched reference
/// function when the cap basis is available.
pub fn pair_and_align(fast: &RegionSlepianBasis, reference: &FullBasis) -> Result<BasisComparison> {
    if fast.band_limit != reference.band_limit {
        return Err(SlepError::BandLimitMismatch(fast.band_limit, reference.band_limit));
    }
    let mut cmp = pair_vectors(
        &fast.spectral,
        &fast.eigenvalues,
        &reference.vectors,
        &reference.eigenvalues,
        fast.n_keep,
    )?;
    if let Some(cap_basis) = &fast.cap_basis {
        let rotator = SpectralRotator::new(fast.band_limit);
        for p in cmp.pairs.iter_mut() {
            p.q = Some(quality_factor_rotated(
                &reference.vectors[p.alpha],
                cap_basis,
                &fast.euler_to_pole,
                fast.n_keep,
                &rotator,
            )?);
        }
    }
    Ok(cmp)
}

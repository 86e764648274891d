//! Thin wrappers over faer for the dense Hermitian work.

use faer::linalg::matmul::matmul_with_conj;
use faer::{Accum, Conj, Mat, MatRef, Par, Side};
use num_complex::Complex64;

use crate::error::{Result, SlepError};

/// Eigenpairs of a Hermitian matrix, eigenvalues descending. Eigenvector
/// column `k` of the returned matrix belongs to eigenvalue `k`.
pub fn hermitian_eig_desc(a: MatRef<'_, Complex64>) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let n = a.nrows();
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| SlepError::Eigen(format!("{e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let vals: Vec<f64> = (0..n).rev().map(|k| s[k].re).collect();
    let vecs = Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok((vals, vecs))
}

/// Eigenpairs of a real symmetric matrix, eigenvalues descending.
pub fn symmetric_eig_desc(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| SlepError::Eigen(format!("{e:?}")))?;
    let s = eig.S();
    let u = eig.U();
    let vals: Vec<f64> = (0..n).rev().map(|k| s[k]).collect();
    let vecs = Mat::from_fn(n, n, |i, k| u[(i, n - 1 - k)]);
    Ok((vals, vecs))
}

/// Index of the entry of largest magnitude; the first one wins among
/// entries equal to within rounding.
pub fn dominant_index(mags: impl Iterator<Item = f64> + Clone) -> usize {
    let max = mags.clone().fold(0.0, f64::max);
    mags.enumerate()
        .find(|(_, v)| *v >= max * (1.0 - 1e-9))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// Rescales a complex vector by a unit phase so that its dominant entry is
/// real and positive.
pub fn normalize_phase(v: &mut [Complex64]) {
    let k = dominant_index(v.iter().map(|c| c.norm()));
    let c = v[k];
    if c.norm() > 0.0 {
        let ph = c.conj() / c.norm();
        v.iter_mut().for_each(|x| *x *= ph);
        v[k] = Complex64::new(v[k].norm(), 0.0);
    }
}

/// Flips the sign of a real vector so that its dominant entry is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let k = dominant_index(v.iter().map(|c| c.abs()));
    if v[k] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// `Bᴴ B` for a tall matrix `B`, computed column block by column block with
/// the sequential kernel so the result does not depend on thread count.
pub fn gram(b: MatRef<'_, Complex64>) -> Mat<Complex64> {
    use rayon::prelude::*;
    let n = b.ncols();
    const BLOCK: usize = 128;
    let blocks: Vec<(usize, Mat<Complex64>)> = (0..n.div_ceil(BLOCK))
        .into_par_iter()
        .map(|c| {
            let c0 = c * BLOCK;
            let w = BLOCK.min(n - c0);
            let mut out = Mat::<Complex64>::zeros(n, w);
            matmul_with_conj(
                &mut out,
                Accum::Replace,
                b.transpose(),
                Conj::Yes,
                b.subcols(c0, w),
                Conj::No,
                Complex64::new(1.0, 0.0),
                Par::Seq,
            );
            (c0, out)
        })
        .collect();
    let mut g = Mat::<Complex64>::zeros(n, n);
    for (c0, blk) in blocks {
        for j in 0..blk.ncols() {
            for i in 0..n {
                g[(i, c0 + j)] = blk[(i, j)];
            }
        }
    }
    g
}

/// Replaces `a` by `(a + aᴴ) / 2` and returns the largest entry change.
pub fn hermitize(a: &mut Mat<Complex64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in j..n {
            let x = a[(i, j)];
            let y = a[(j, i)].conj();
            let avg = (x + y) * 0.5;
            worst = worst.max((avg - x).norm());
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
        let d = a[(j, j)];
        a[(j, j)] = Complex64::new(d.re, 0.0);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descending_order() {
        let a = Mat::<f64>::from_fn(3, 3, |i, j| if i == j { [1.0, 3.0, 2.0][i] } else { 0.0 });
        let (vals, vecs) = symmetric_eig_desc(a.as_ref()).unwrap();
        assert_eq!(vals.len(), 3);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[2] - 1.0).abs() < 1e-14);
        assert!((vecs[(1, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gram_matches_naive() {
        let b = Mat::<Complex64>::from_fn(300, 140, |i, j| {
            Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64)
        });
        let g = gram(b.as_ref());
        for (i, j) in [(0, 0), (3, 139), (139, 2), (70, 71)] {
            let want: Complex64 = (0..300).map(|k| b[(k, i)].conj() * b[(k, j)]).sum();
            assert!((g[(i, j)] - want).norm() < 1e-9);
        }
    }

    #[test]
    fn phase_convention() {
        let mut v = vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, -2.0)];
        normalize_phase(&mut v);
        assert_eq!(v[1], Complex64::new(2.0, 0.0));
        assert!((v[0] - Complex64::new(0.0, 0.1)).norm() < 1e-15);
    }
}

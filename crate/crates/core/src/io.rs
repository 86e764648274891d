//! Plain-text and binary artifacts.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Result, SlepError};
use crate::harmonics::{inverse_index, SpectralVector};
use crate::metrics::BasisComparison;
use crate::polarcap::CapSlepianBasis;
use crate::quadrature::{EquiangularGrid, RegionMask};
use crate::reference::FullBasis;
use crate::region_slepian::RegionSlepianBasis;

pub const SAMPLES_MAGIC: &[u8; 8] = b"SLEPSAMP";

/// 17 significant digits, enough to round-trip any f64.
#[inline]
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_spectral_csv(path: &Path, v: &SpectralVector) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "l,m,re,im")?;
    for (i, c) in v.coeffs().iter().enumerate() {
        let (l, m) = inverse_index(i);
        writeln!(w, "{l},{m},{},{}", fmt_f64(c.re), fmt_f64(c.im))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectral_csv(path: &Path) -> Result<SpectralVector> {
    let perr = |line: usize, msg: String| SlepError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let file = File::open(path).map_err(|e| perr(0, e.to_string()))?;
    let mut coeffs = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if k == 0 {
            if line.trim() != "l,m,re,im" {
                return Err(perr(1, format!("unexpected header {line:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(perr(k + 1, "expected 4 fields".into()));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| perr(k + 1, e.to_string()));
        coeffs.push(Complex64::new(num(f[2])?, num(f[3])?));
    }
    let l = (coeffs.len() as f64).sqrt().round() as usize;
    SpectralVector::from_coeffs(l, coeffs)
}

/// Row-major complex matrix with a 16-byte header.
pub fn write_samples_bin(path: &Path, rows: usize, cols: usize, data: &[Complex64]) -> Result<()> {
    if data.len() != rows * cols {
        return Err(SlepError::LengthMismatch {
            expected: rows * cols,
            got: data.len(),
        });
    }
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| SlepError::InvalidArgument(format!("dimension {v} exceeds u32")))
    };
    let mut w = create(path)?;
    w.write_all(SAMPLES_MAGIC)?;
    w.write_all(&to_u32(rows)?.to_le_bytes())?;
    w.write_all(&to_u32(cols)?.to_le_bytes())?;
    for c in data {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_bin(path: &Path) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |msg: &str| SlepError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: msg.to_string(),
    };
    if bytes.len() < 16 || &bytes[..8] != SAMPLES_MAGIC {
        return Err(bad("missing SLEPSAMP header"));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + rows * cols * 16 {
        return Err(bad("payload size does not match header"));
    }
    let data = bytes[16..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((rows, cols, data))
}

/// "theta,phi,weight,inside" per grid sample.
pub fn write_grid_dump(path: &Path, grid: &EquiangularGrid, mask: &RegionMask) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "theta,phi,weight,inside")?;
    for i in 0..grid.len() {
        let p = grid.point(i);
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.theta),
            fmt_f64(p.phi),
            fmt_f64(grid.weight(i)),
            u8::from(mask.inside()[i])
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_meta(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads flat "key = value" lines.
pub fn read_meta(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect())
}

/// `eigenvalues.csv` (rank,lambda,m) for every function and one
/// `vector_<rank>.csv` per kept function; ranks are 1-based.
pub fn write_cap_dir(dir: &Path, basis: &CapSlepianBasis) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join("eigenvalues.csv"))?;
    writeln!(w, "rank,lambda,m")?;
    for (i, f) in basis.functions().iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, fmt_f64(f.lambda), f.m)?;
    }
    w.flush()?;
    for alpha in 0..basis.kept().min(basis.retained()) {
        write_spectral_csv(&dir.join(format!("vector_{}.csv", alpha + 1)), &basis.vector(alpha)?)?;
    }
    write_meta(
        &dir.join("meta.txt"),
        &[
            ("L", basis.band_limit().to_string()),
            ("Theta", fmt_f64(basis.theta())),
            ("N_Theta", fmt_f64(basis.shannon())),
            ("N_keep", basis.kept().to_string()),
        ],
    )
}

fn write_eigen_csv(path: &Path, vals: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "a,lambda")?;
    for (i, v) in vals.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

fn write_reduced_csv(path: &Path, v: &[Complex64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "alpha,re,im")?;
    for (i, c) in v.iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, fmt_f64(c.re), fmt_f64(c.im))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_region_dir(dir: &Path, basis: &RegionSlepianBasis) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_eigen_csv(&dir.join("eigenvalues.csv"), &basis.eigenvalues)?;
    for (a, (r, s)) in basis.reduced.iter().zip(&basis.spectral).enumerate() {
        write_reduced_csv(&dir.join(format!("reduced_{}.csv", a + 1)), r)?;
        write_spectral_csv(&dir.join(format!("spectral_{}.csv", a + 1)), s)?;
    }
    let (lat, lon) = basis.cap.center.lat_lon_deg();
    write_meta(
        &dir.join("meta.txt"),
        &[
            ("L", basis.band_limit.to_string()),
            (
                "method",
                match basis.method {
                    crate::region_slepian::Method::Reduced => "reduced".into(),
                    crate::region_slepian::Method::ConventionalFallback => "conventional-fallback".into(),
                },
            ),
            ("Theta", fmt_f64(basis.cap.radius_theta)),
            ("cap_center_theta", fmt_f64(basis.cap.center.theta)),
            ("cap_center_phi", fmt_f64(basis.cap.center.phi)),
            ("cap_center_lat_deg", fmt_f64(lat)),
            ("cap_center_lon_deg", fmt_f64(lon)),
            (
                "euler_to_pole",
                format!(
                    "{} {} {}",
                    fmt_f64(basis.euler_to_pole.phi),
                    fmt_f64(basis.euler_to_pole.vartheta),
                    fmt_f64(basis.euler_to_pole.omega)
                ),
            ),
            ("grid_res", basis.grid_res.to_string()),
            ("n_theta", basis.n_theta.to_string()),
            ("n_phi", basis.n_phi.to_string()),
            ("masked_samples", basis.masked_samples.to_string()),
            ("N_Theta", fmt_f64(basis.cap_shannon)),
            ("N_keep", basis.n_keep.to_string()),
            ("N_P", fmt_f64(basis.n_p)),
        ],
    )
}

pub fn write_reference_dir(dir: &Path, basis: &FullBasis, area: Option<f64>) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_eigen_csv(&dir.join("eigenvalues.csv"), &basis.eigenvalues)?;
    for (a, s) in basis.vectors.iter().enumerate() {
        write_spectral_csv(&dir.join(format!("spectral_{}.csv", a + 1)), s)?;
    }
    let mut meta = vec![
        ("L", basis.band_limit.to_string()),
        ("grid_res", basis.grid_res.to_string()),
        ("masked_samples", basis.masked_samples.to_string()),
        ("trace_K", fmt_f64(basis.trace)),
    ];
    if let Some(a) = area {
        meta.push(("area", fmt_f64(a)));
        meta.push(("N_analytic", fmt_f64(crate::reference::analytic_shannon(a, basis.band_limit))));
    }
    write_meta(&dir.join("meta.txt"), &meta)
}

/// "a,alpha,lambda_fast,lambda_ref,abs_diff,E_a,Q,flag"; ranks are 1-based,
/// flagged pairs leave `E_a` empty.
pub fn write_comparison_csv(path: &Path, cmp: &BasisComparison) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "a,alpha,lambda_fast,lambda_ref,abs_diff,E_a,Q,flag")?;
    for p in &cmp.pairs {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.a + 1,
            p.alpha + 1,
            fmt_f64(p.lambda_fast),
            fmt_f64(p.lambda_ref),
            fmt_f64(p.abs_diff),
            p.e_a.map(fmt_f64).unwrap_or_default(),
            p.q.map(fmt_f64).unwrap_or_default(),
            if p.flagged { "degenerate-subspace mixing" } else { "" }
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.csv");
        let coeffs: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64 / 7.0, -1.0 / (i as f64 + 3.0))).collect();
        let v = SpectralVector::from_coeffs(3, coeffs).unwrap();
        write_spectral_csv(&p, &v).unwrap();
        assert_eq!(read_spectral_csv(&p).unwrap(), v);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("l,m,re,im\n0,0,"));
        assert_eq!(text.lines().count(), 10);
    }

    #[test]
    fn samples_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        let data: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 0.5)).collect();
        write_samples_bin(&p, 2, 3, &data).unwrap();
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..8], b"SLEPSAMP");
        assert_eq!(bytes.len(), 16 + 6 * 16);
        assert_eq!(read_samples_bin(&p).unwrap(), (2, 3, data));
    }
}

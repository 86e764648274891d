use std::f64::consts::PI;

use crate::error::{Result, SlepError};

const BIG: f64 = 1e250;
const LN_BIG: f64 = 575.646_273_248_511_4; // ln(1e250)

/// ln |P̄_m^m(x)| up to the sign, with sin θ = sqrt(1 - x²). Returns -inf
/// when the value is exactly zero (m > 0 at a pole).
fn ln_sectoral(m: usize, sin_theta: f64) -> f64 {
    let mut acc = ((2 * m + 1) as f64 / (4.0 * PI)).ln();
    for k in 1..=m {
        acc += ((2 * k - 1) as f64 / (2 * k) as f64).ln();
    }
    let half = 0.5 * acc;
    if m == 0 {
        half
    } else if sin_theta == 0.0 {
        f64::NEG_INFINITY
    } else {
        half + m as f64 * sin_theta.ln()
    }
}

/// Fully normalized `N_l^m P_l^m(x)` (Condon–Shortley phase included) for
/// every degree `l = m..lmax` written into `out[l - m]`.
///
/// The sectoral seed is carried as a mantissa/log-scale pair so that very
/// small seeds at high order do not underflow before the recursion lifts
/// them back into range.
pub fn legendre_column(m: usize, lmax: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() > lmax - m);
    let x = x.clamp(-1.0, 1.0);
    let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let ln_seed = ln_sectoral(m, s);
    if ln_seed == f64::NEG_INFINITY {
        out[..=lmax - m].iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    let mut scale = ln_seed;
    let mut factor = scale.exp();
    let emit = |p: f64, scale: f64, factor: f64| -> f64 {
        if factor > 0.0 && factor.is_finite() {
            p * factor
        } else {
            let v = scale + p.abs().ln();
            if v < -745.0 || p == 0.0 {
                0.0
            } else {
                p.signum() * v.exp()
            }
        }
    };

    let mut p_prev = 0.0;
    let mut p = sign;
    out[0] = emit(p, scale, factor);
    let mm = (m * m) as f64;
    let mut a_prev = 1.0;
    for l in (m + 1)..=lmax {
        let ll = (l * l) as f64;
        let a = ((4.0 * ll - 1.0) / (ll - mm)).sqrt();
        let next = if l == m + 1 {
            a * x * p
        } else {
            a * (x * p - p_prev / a_prev)
        };
        p_prev = p;
        p = next;
        a_prev = a;
        if p.abs() > BIG {
            p /= BIG;
            p_prev /= BIG;
            scale += LN_BIG;
            factor = scale.exp();
        }
        out[l - m] = emit(p, scale, factor);
    }
}

/// `N_l^m P_l^m(x)` for a single degree and order.
pub fn normalized_legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(SlepError::OrderExceedsDegree {
            l: l as i64,
            m: m as i64,
        });
    }
    let mut buf = vec![0.0; l - m + 1];
    legendre_column(m, l, x, &mut buf);
    Ok(buf[l - m])
}

/// Index of `(l, m)`, `m >= 0`, in a triangular table.
#[inline]
pub(crate) fn tri_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// All `N_l^m P_l^m(x)` for `0 <= m <= l < lmax_excl`, laid out by
/// [`tri_index`].
pub fn legendre_table(lmax_excl: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    if lmax_excl == 0 {
        return;
    }
    out.resize(lmax_excl * (lmax_excl + 1) / 2, 0.0);
    let mut col = vec![0.0; lmax_excl];
    for m in 0..lmax_excl {
        legendre_column(m, lmax_excl - 1, x, &mut col);
        for l in m..lmax_excl {
            out[tri_index(l, m)] = col[l - m];
        }
    }
}

/// Unnormalized Legendre polynomials `P_0..=P_nmax` at `x`.
pub fn legendre_polynomials(nmax: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; nmax + 1];
    p[0] = 1.0;
    if nmax >= 1 {
        p[1] = x;
    }
    for n in 2..=nmax {
        let nf = n as f64;
        p[n] = ((2.0 * nf - 1.0) * x * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_degree_values() {
        let c = (4.0 * PI).sqrt().recip();
        for x in [-1.0, -0.3, 0.0, 0.9, 1.0] {
            assert!((normalized_legendre(0, 0, x).unwrap() - c).abs() < 1e-15);
        }
        assert!((normalized_legendre(1, 0, 1.0).unwrap() - 0.488_602_511_902_919_9).abs() < 1e-15);
        // N_1^1 P_1^1 = -sqrt(3/8pi) sin θ
        let x: f64 = 0.4;
        let want = -(3.0 / (8.0 * PI)).sqrt() * (1.0 - x * x).sqrt();
        assert!((normalized_legendre(1, 1, x).unwrap() - want).abs() < 1e-15);
        // N_2^0 P_2^0 = sqrt(5/4pi) (3x²-1)/2
        let want = (5.0 / (4.0 * PI)).sqrt() * (3.0 * x * x - 1.0) / 2.0;
        assert!((normalized_legendre(2, 0, x).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn order_above_degree_is_error() {
        assert!(normalized_legendre(2, 3, 0.1).is_err());
    }

    #[test]
    fn pole_values() {
        assert_eq!(normalized_legendre(5, 2, 1.0).unwrap(), 0.0);
        let v = normalized_legendre(7, 0, -1.0).unwrap();
        assert!((v + (15.0 / (4.0 * PI)).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn high_degree_is_finite() {
        for &x in &[0.0, 0.5, 0.999, 1e-3] {
            let mut col = vec![0.0; 1];
            for m in [0usize, 100, 500, 1023] {
                col.resize(1024 - m, 0.0);
                legendre_column(m, 1023, x, &mut col);
                assert!(col.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn polynomials_match_closed_form() {
        let x = 0.37;
        let p = legendre_polynomials(3, x);
        assert!((p[2] - (3.0 * x * x - 1.0) / 2.0).abs() < 1e-15);
        assert!((p[3] - (5.0 * x * x * x - 3.0 * x) / 2.0).abs() < 1e-15);
    }
}

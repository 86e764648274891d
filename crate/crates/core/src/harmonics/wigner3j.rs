//! Wigner 3j symbols.
//!
//! Values come from the three-term recursion in the first angular momentum
//! (Schulten and Gordon), run outward from both ends of the allowed range
//! and matched where the two solutions overlap. The alternating Racah sum
//! loses several digits to cancellation already near l = 20.

use std::sync::OnceLock;

const LOG_FACT_LEN: usize = 4096;

fn log_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LOG_FACT_LEN];
        for k in 1..LOG_FACT_LEN {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

#[inline]
fn lf(n: i64) -> f64 {
    debug_assert!(n >= 0);
    log_factorials()[n as usize]
}

/// Quantum numbers of one 3j symbol `(l1 l2 l3; m1 m2 m3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Wigner3jQuery {
    pub l1: i64,
    pub l2: i64,
    pub l3: i64,
    pub m1: i64,
    pub m2: i64,
    pub m3: i64,
}

impl Wigner3jQuery {
    pub fn new(l1: i64, l2: i64, l3: i64, m1: i64, m2: i64, m3: i64) -> Self {
        Wigner3jQuery {
            l1,
            l2,
            l3,
            m1,
            m2,
            m3,
        }
    }

    fn admissible(&self) -> bool {
        let Wigner3jQuery {
            l1,
            l2,
            l3,
            m1,
            m2,
            m3,
        } = *self;
        l1 >= 0
            && l2 >= 0
            && l3 >= 0
            && m1.abs() <= l1
            && m2.abs() <= l2
            && m3.abs() <= l3
            && m1 + m2 + m3 == 0
            && l3 >= (l1 - l2).abs()
            && l3 <= l1 + l2
    }
}

/// The 3j symbol; zero whenever the selection rules fail.
pub fn wigner3j(q: Wigner3jQuery) -> f64 {
    if !q.admissible() {
        return 0.0;
    }
    let (jmin, vals) = wigner3j_range(q.l2, q.l3, q.m2, q.m3);
    vals[(q.l1 - jmin) as usize]
}

/// All symbols `(j l2 l3; -(m2+m3) m2 m3)` for `j = jmin..=l2+l3`.
/// Returns `jmin` together with the values. An empty vector means no `j`
/// is admissible.
pub fn wigner3j_range(l2: i64, l3: i64, m2: i64, m3: i64) -> (i64, Vec<f64>) {
    let m1 = -(m2 + m3);
    let jmin = (l2 - l3).abs().max(m1.abs());
    let jmax = l2 + l3;
    if m2.abs() > l2 || m3.abs() > l3 || jmin > jmax {
        return (jmin, Vec::new());
    }
    let n = (jmax - jmin + 1) as usize;
    let mut f = vec![0.0; n];

    if m1 == 0 && m2 == 0 {
        for (i, j) in (jmin..=jmax).enumerate() {
            f[i] = all_zero_orders(j, l2, l3);
        }
        return (jmin, f);
    }
    if n == 1 {
        let sign = if (l2 - l3 - m1).rem_euclid(2) == 1 { -1.0 } else { 1.0 };
        f[0] = sign / ((2 * jmin + 1) as f64).sqrt();
        return (jmin, f);
    }

    let (j2, j3) = (l2 as f64, l3 as f64);
    let (m1f, m2f, m3f) = (m1 as f64, m2 as f64, m3 as f64);
    let a_coef = |j: f64| -> f64 {
        ((j * j - (j2 - j3) * (j2 - j3))
            * ((j2 + j3 + 1.0) * (j2 + j3 + 1.0) - j * j)
            * (j * j - m1f * m1f))
            .max(0.0)
            .sqrt()
    };
    let b_coef = |j: f64| -> f64 {
        -(2.0 * j + 1.0)
            * (j2 * (j2 + 1.0) * m1f - j3 * (j3 + 1.0) * m1f - j * (j + 1.0) * (m3f - m2f))
    };
    let at = |j: i64| (j - jmin) as usize;

    // backward from jmax
    let mut g = vec![0.0; n];
    g[n - 1] = 1.0;
    let mut stop_b = jmin;
    {
        let mut j = jmax;
        while j > jmin {
            let jf = j as f64;
            let next = if j == jmax { 0.0 } else { g[at(j + 1)] };
            let val = -(b_coef(jf) * g[at(j)] + jf * a_coef(jf + 1.0) * next)
                / ((jf + 1.0) * a_coef(jf));
            g[at(j - 1)] = val;
            if val.abs() > 1e100 {
                g[at(j - 1)..].iter_mut().for_each(|v| *v *= 1e-100);
            }
            j -= 1;
            // stop after the first local maximum from the top unless the lower
            // end cannot be reached by forward recursion
            if jmin > 0 && j < jmax - 1 && j > jmin && g[at(j)].abs() < g[at(j + 1)].abs() {
                stop_b = j;
                break;
            }
        }
    }

    if stop_b == jmin {
        f.copy_from_slice(&g);
    } else {
        // forward from jmin up to stop_b + 1, overlapping three points
        let top = (stop_b + 2).min(jmax);
        let mut h = vec![0.0; n];
        h[0] = 1.0;
        let mut j = jmin;
        while j < top {
            let jf = j as f64;
            let prev = if j == jmin { 0.0 } else { h[at(j - 1)] };
            let val = -(b_coef(jf) * h[at(j)] + (jf + 1.0) * a_coef(jf) * prev)
                / (jf * a_coef(jf + 1.0));
            h[at(j + 1)] = val;
            if val.abs() > 1e100 {
                h[..=at(j + 1)].iter_mut().for_each(|v| *v *= 1e-100);
            }
            j += 1;
        }
        let lo = stop_b.max(jmin);
        let (mut num, mut den) = (0.0, 0.0);
        for j in lo..=top {
            num += h[at(j)] * g[at(j)];
            den += h[at(j)] * h[at(j)];
        }
        let scale = num / den;
        for j in jmin..stop_b {
            f[at(j)] = h[at(j)] * scale;
        }
        for j in stop_b..=jmax {
            f[at(j)] = g[at(j)];
        }
    }

    let norm: f64 = (jmin..=jmax)
        .map(|j| (2 * j + 1) as f64 * f[at(j)] * f[at(j)])
        .sum::<f64>()
        .sqrt();
    let want_neg = (l2 - l3 + m2 + m3).rem_euclid(2) == 1;
    let s = if (f[n - 1] < 0.0) != want_neg { -1.0 } else { 1.0 };
    for v in f.iter_mut() {
        *v *= s / norm;
    }
    (jmin, f)
}

/// Closed form of `(j l2 l3; 0 0 0)`.
fn all_zero_orders(l1: i64, l2: i64, l3: i64) -> f64 {
    let big_j = l1 + l2 + l3;
    if big_j % 2 == 1 || l3 < (l1 - l2).abs() || l3 > l1 + l2 {
        return 0.0;
    }
    let g = big_j / 2;
    let ln = 0.5 * (lf(big_j - 2 * l1) + lf(big_j - 2 * l2) + lf(big_j - 2 * l3) - lf(big_j + 1))
        + lf(g)
        - lf(g - l1)
        - lf(g - l2)
        - lf(g - l3);
    let v = ln.exp();
    if g % 2 == 1 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let v = wigner3j(Wigner3jQuery::new(1, 1, 0, 0, 0, 0));
        assert!((v + 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(wigner3j(Wigner3jQuery::new(5, 1, 10, 0, 0, 0)), 0.0);
        assert_eq!(wigner3j(Wigner3jQuery::new(2, 1, 1, 1, 0, 0)), 0.0);
        let v = wigner3j(Wigner3jQuery::new(1, 1, 1, 1, 0, -1));
        assert!((v + 1.0 / 6f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn small_degree_values() {
        // sympy exact values
        for (q, want) in [
            ((7, 5, 7, 1, 2, -3), 0.09538598771657301),
            ((13, 10, 10, -3, 0, 3), -0.026191406463115317),
            ((9, 8, 3, 1, -2, 1), 0.027820744203732862),
            ((25, 12, 20, 0, 5, -5), -0.02307798053231155),
            ((0, 6, 6, 0, 6, -6), 0.2773500981126146),
        ] {
            let v = wigner3j(Wigner3jQuery::new(q.0, q.1, q.2, q.3, q.4, q.5));
            assert!((v - want).abs() < 1e-15, "{q:?}: {v} vs {want}");
        }
    }

    #[test]
    fn range_is_normalized() {
        for (l2, l3, m2, m3) in [(60, 45, 10, -7), (100, 100, 30, -30), (150, 3, 1, 2)] {
            let (jmin, vals) = wigner3j_range(l2, l3, m2, m3);
            let s: f64 = vals
                .iter()
                .enumerate()
                .map(|(i, v)| (2 * (jmin + i as i64) + 1) as f64 * v * v)
                .sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}

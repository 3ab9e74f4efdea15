//! Chi-square tail probabilities and the G-test of homogeneity.

use std::f64::consts::PI;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `z > 0`.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        return (PI / (PI * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let t = z + LANCZOS_G + 0.5;
    let sum = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (z + i as f64 + 1.0));
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Regularized upper incomplete gamma `Q(a, x) = Gamma(a, x) / Gamma(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a={a}, x={x}");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_fraction(a, x)
    }
}

fn prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Series for the regularized lower incomplete gamma.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

/// Continued fraction for the regularized upper incomplete gamma (modified Lentz).
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    prefactor(a, x) * h
}

/// Upper tail `P(X >= x)` of a chi-square distribution with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GTest {
    pub g: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Likelihood-ratio test that all rows share one distribution over columns.
///
/// Empty rows and columns are dropped before the expected counts and the
/// degrees of freedom are computed.
pub fn g_test(rows: &[Vec<u64>]) -> GTest {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let col_totals: Vec<u64> = (0..width)
        .map(|j| rows.iter().map(|r| r.get(j).copied().unwrap_or(0)).sum())
        .collect();
    let live_cols: Vec<usize> = (0..width).filter(|&j| col_totals[j] > 0).collect();
    let live_rows: Vec<&Vec<u64>> = rows.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    let total: u64 = col_totals.iter().sum();
    if live_rows.len() < 2 || live_cols.len() < 2 {
        return GTest { g: 0.0, dof: 0, p_value: 1.0 };
    }
    let total = total as f64;
    let mut g = 0.0;
    for row in &live_rows {
        let row_total: u64 = row.iter().sum();
        for &j in &live_cols {
            let observed = row.get(j).copied().unwrap_or(0);
            if observed == 0 {
                continue;
            }
            let expected = row_total as f64 * col_totals[j] as f64 / total;
            g += observed as f64 * (observed as f64 / expected).ln();
        }
    }
    // Rounding can leave a tiny negative sum on homogeneous tables.
    let g = (2.0 * g).max(0.0);
    let dof = (live_rows.len() - 1) * (live_cols.len() - 1);
    GTest { g, dof, p_value: chi_square_sf(g, dof as f64) }
}

//! Empirical distribution statistics.

use libm::erfc;

use crate::error::{LabError, Result};

/// `Phi(x)`, the standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Kolmogorov distance `sup_x |F_M(x) - F(x)|` of sorted samples against a
/// continuous reference `cdf`.
pub fn kolmogorov_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(LabError::param("samples", "need at least one sample"));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`; both inputs sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::param("samples", "both samples must be nonempty"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        // step past every copy of the smaller value in both samples
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic critical value of the two-sample statistic at `level`:
/// `sqrt(-ln(level / 2) / 2) * sqrt((n + m) / (n m))`.
pub fn ks_critical_value(n: usize, m: usize, level: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(level / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// DKW bound `sqrt(ln(2 / 0.001) / 2)` on `sqrt(M) D` at the 0.999 level.
pub const KS_DKW_999: f64 = 1.95;

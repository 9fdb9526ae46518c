//! Poisson mixing weights for uniformization.
//!
//! Weights are generated by the ratio recurrence outward from the mode and
//! normalized over a range whose Chernoff tail is below `1e-12 * tol`, which
//! avoids evaluating `exp(-mean)` directly (it underflows for large means).
//! The range actually used is then cut back to where each Chernoff tail
//! bound drops below `tol / 2`.

/// `ln` of the Chernoff bound on `P(N >= k)` (for `k > mean`) or
/// `P(N <= k)` (for `k < mean`), `N ~ Poisson(mean)`.
fn ln_chernoff(mean: f64, k: f64) -> f64 {
    if k <= 0.0 {
        -mean
    } else {
        -mean + k * (1.0 + mean.ln() - k.ln())
    }
}

/// First `k > mean` with `P(N >= k) <= eps` by the Chernoff bound.
fn upper_cut(mean: f64, eps: f64) -> usize {
    let target = eps.ln();
    let mut k = mean.floor() + 1.0;
    // bracket, then bisect
    let mut step = (mean.sqrt() + 1.0).ceil();
    while ln_chernoff(mean, k + step) > target {
        step *= 2.0;
    }
    let (mut lo, mut hi) = (k, k + step);
    if ln_chernoff(mean, lo) <= target {
        return lo as usize;
    }
    while hi - lo > 1.0 {
        let mid = ((lo + hi) * 0.5).floor();
        if ln_chernoff(mean, mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    k = hi;
    k as usize
}

/// Last `k < mean` with `P(N <= k) <= eps`, or `None` if even `k = 0`
/// carries too much mass (then the range starts at 0).
fn lower_cut(mean: f64, eps: f64) -> Option<usize> {
    let target = eps.ln();
    if -mean > target {
        return None;
    }
    let mut hi = mean.ceil() - 1.0;
    if hi < 0.0 {
        return None;
    }
    if ln_chernoff(mean, hi) <= target {
        return Some(hi as usize);
    }
    let mut lo = 0.0;
    while hi - lo > 1.0 {
        let mid = ((lo + hi) * 0.5).floor();
        if ln_chernoff(mean, mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo as usize)
}

/// Normalized Poisson weights `w_k`, `k in [left, left + weights.len())`.
#[derive(Clone, Debug)]
pub struct PoissonWeights {
    pub left: usize,
    pub weights: Vec<f64>,
}

impl PoissonWeights {
    pub fn new(mean: f64, tol: f64) -> Self {
        debug_assert!(mean >= 0.0 && tol > 0.0);
        if mean == 0.0 {
            return PoissonWeights {
                left: 0,
                weights: vec![1.0],
            };
        }
        let eps_wide = (tol * 1e-12).max(1e-300);
        let wide_lo = lower_cut(mean, eps_wide).map_or(0, |k| k + 1);
        let wide_hi = upper_cut(mean, eps_wide);
        let mode = (mean.floor() as usize).clamp(wide_lo, wide_hi);

        let mut w = vec![0.0; wide_hi - wide_lo + 1];
        w[mode - wide_lo] = 1.0;
        for k in (mode + 1)..=wide_hi {
            w[k - wide_lo] = w[k - 1 - wide_lo] * mean / k as f64;
        }
        for k in (wide_lo..mode).rev() {
            w[k - wide_lo] = w[k + 1 - wide_lo] * (k + 1) as f64 / mean;
        }
        let mut total = crate::numeric::KahanSum::new();
        for &x in &w {
            total.add(x);
        }
        let total = total.value();

        let cut_lo = lower_cut(mean, tol / 2.0).map_or(0, |k| k + 1).max(wide_lo);
        let cut_hi = upper_cut(mean, tol / 2.0)
            .saturating_sub(1)
            .min(wide_hi)
            .max(cut_lo);
        let weights = w[cut_lo - wide_lo..=cut_hi - wide_lo]
            .iter()
            .map(|x| x / total)
            .collect();
        PoissonWeights {
            left: cut_lo,
            weights,
        }
    }

    pub fn right(&self) -> usize {
        self.left + self.weights.len() - 1
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        if k < self.left {
            0.0
        } else {
            self.weights.get(k - self.left).copied().unwrap_or(0.0)
        }
    }

    pub fn mass(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .collect::<crate::numeric::KahanSum>()
            .value()
    }
}

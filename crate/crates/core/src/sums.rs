//! Heavy-tailed i.i.d. sums: scaling functions, iterated-logarithm
//! constants, and Monte Carlo probes of medians and tails.
//!
//! The sums here are `S_n = tau_1 + ... + tau_n` with the trap law, i.e. the
//! ball volumes of the invariant measure. All probes draw replicate `r` from
//! its own stream keyed on `(seed, r)` and aggregate in replicate order, so
//! output does not depend on the worker count.

use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::env::TrapLaw;
use crate::error::{LabError, Result};
use crate::numeric::{loglog_slope, ols_slope, KahanSum};
use crate::rng::{tags, StreamRng};
use crate::table::ResultTable;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// The five-way split of the tail exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingRegime {
    /// `alpha in (0, 1)`: infinite mean.
    Stable,
    /// `alpha = 1`.
    Critical,
    /// `alpha in (1, 2)`: finite mean, infinite variance.
    StableCentered,
    /// `alpha = 2`.
    Borderline,
    /// `alpha > 2`: finite variance.
    Gaussian,
}

impl ScalingRegime {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(LabError::param(
                "alpha",
                format!("must be > 0, got {alpha}"),
            ));
        }
        Ok(if alpha < 1.0 {
            ScalingRegime::Stable
        } else if alpha == 1.0 {
            ScalingRegime::Critical
        } else if alpha < 2.0 {
            ScalingRegime::StableCentered
        } else if alpha == 2.0 {
            ScalingRegime::Borderline
        } else {
            ScalingRegime::Gaussian
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ScalingRegime::Stable => "(0,1)",
            ScalingRegime::Critical => "{1}",
            ScalingRegime::StableCentered => "(1,2)",
            ScalingRegime::Borderline => "{2}",
            ScalingRegime::Gaussian => "(2,inf)",
        }
    }
}

/// On-diagonal heat kernel scale `phi_alpha(t)`.
pub fn phi_alpha(t: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(LabError::param(
            "alpha",
            format!("must be > 0, got {alpha}"),
        ));
    }
    if !(t > 0.0) {
        return Err(LabError::Domain(format!("phi_alpha needs t > 0, got {t}")));
    }
    if alpha < 1.0 {
        Ok(t.powf(-1.0 / (1.0 + alpha)))
    } else if alpha == 1.0 {
        if !(t > std::f64::consts::E) {
            return Err(LabError::Domain(format!(
                "phi_alpha at alpha = 1 needs t > e so that log t > 1, got {t}"
            )));
        }
        Ok((t * t.ln()).powf(-0.5))
    } else {
        Ok(t.powf(-0.5))
    }
}

/// Ball-volume scale `v_alpha(r)`.
pub fn v_alpha(r: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(LabError::param(
            "alpha",
            format!("must be > 0, got {alpha}"),
        ));
    }
    if !(r >= 1.0) {
        return Err(LabError::Domain(format!("v_alpha needs r >= 1, got {r}")));
    }
    Ok(if alpha < 1.0 {
        r.powf(1.0 / alpha)
    } else if alpha == 1.0 {
        r * r.ln().max(1.0)
    } else {
        r
    })
}

/// Constants of the lower iterated-logarithm statements for `alpha in (0, 2]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LilConstants {
    /// Almost-sure liminf of the suitably normalized (and, for
    /// `alpha > 1`, centred) sum.
    pub liminf_const: f64,
    /// Liminf of `(S_n - n mu(b_n)) / (a_n (log log n)^{1/2})`, in `[-sqrt 2, 0]`.
    pub k_alpha: f64,
    /// Limit of the truncated-mean drift term; only defined for `alpha < 1`.
    pub c_alpha: Option<f64>,
}

pub fn lil_constants(alpha: f64, c_f: f64) -> Result<LilConstants> {
    if !(c_f > 0.0) || !c_f.is_finite() {
        return Err(LabError::param("c_f", format!("must be > 0, got {c_f}")));
    }
    let regime = ScalingRegime::from_alpha(alpha)?;
    let k_generic = || {
        (gamma(2.0 - alpha).powf(1.0 / alpha) - 1.0) * alpha / (1.0 - alpha)
            * ((2.0 - alpha) / 2.0).sqrt()
    };
    match regime {
        ScalingRegime::Stable => Ok(LilConstants {
            liminf_const: c_f.powf(1.0 / alpha) * alpha / (1.0 - alpha)
                * gamma(2.0 - alpha).powf(1.0 / alpha),
            k_alpha: k_generic(),
            c_alpha: Some(alpha / (1.0 - alpha) * ((2.0 - alpha) / 2.0).sqrt()),
        }),
        ScalingRegime::Critical => Ok(LilConstants {
            liminf_const: c_f,
            k_alpha: -EULER_GAMMA / std::f64::consts::SQRT_2,
            c_alpha: None,
        }),
        ScalingRegime::StableCentered => Ok(LilConstants {
            liminf_const: c_f.powf(1.0 / alpha) * alpha / (1.0 - alpha)
                * (gamma(2.0 - alpha).powf(1.0 / alpha) - 1.0),
            k_alpha: k_generic(),
            c_alpha: None,
        }),
        ScalingRegime::Borderline => Ok(LilConstants {
            liminf_const: -(2.0 * c_f).sqrt(),
            k_alpha: -std::f64::consts::SQRT_2,
            c_alpha: None,
        }),
        ScalingRegime::Gaussian => Err(LabError::Regime {
            alpha,
            requirement: "iterated-logarithm constants of the stable regimes need alpha <= 2",
        }),
    }
}

/// One replicate sum `S_n` with compensated accumulation.
pub fn sample_sum(law: &TrapLaw, n: u64, rng: &mut StreamRng) -> f64 {
    let mut s = KahanSum::new();
    for _ in 0..n {
        s.add(law.from_uniform(rng.uniform()));
    }
    s.value()
}

fn replicate_sums(law: &TrapLaw, n: u64, m: usize, seed: u64, tag: u64) -> Vec<f64> {
    (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = StreamRng::new(seed, tag ^ n.rotate_left(17), r as u64);
            sample_sum(law, n, &mut rng)
        })
        .collect()
}

#[inline]
fn lnln(n: f64) -> f64 {
    n.ln().ln()
}

/// Centering and the (liminf, limsup) normalizers of the matching regime.
/// `limsup` uses the threshold exponent of the 0/infinity dichotomy.
struct Normalizers {
    mean: f64,
    centred: bool,
    regime: Option<ScalingRegime>,
}

impl Normalizers {
    fn new(law: &TrapLaw) -> Result<Self> {
        match *law {
            TrapLaw::Constant { depth } => Ok(Normalizers {
                mean: depth,
                centred: true,
                regime: None,
            }),
            TrapLaw::Pareto { alpha } => {
                let regime = ScalingRegime::from_alpha(alpha)?;
                let centred = alpha > 1.0;
                Ok(Normalizers {
                    mean: if centred { alpha / (alpha - 1.0) } else { 0.0 },
                    centred,
                    regime: Some(regime),
                })
            }
        }
    }

    fn centre(&self, s: f64, n: f64) -> f64 {
        if self.centred {
            s - n * self.mean
        } else {
            s
        }
    }

    fn liminf(&self, n: f64, alpha: f64) -> f64 {
        match self.regime {
            Some(ScalingRegime::Stable) | Some(ScalingRegime::StableCentered) => {
                n.powf(1.0 / alpha) * lnln(n).powf(1.0 - 1.0 / alpha)
            }
            Some(ScalingRegime::Critical) => n * n.ln(),
            Some(ScalingRegime::Borderline) => (n * n.ln() * lnln(n)).sqrt(),
            Some(ScalingRegime::Gaussian) | None => (n * lnln(n)).sqrt(),
        }
    }

    fn limsup(&self, n: f64, alpha: f64) -> f64 {
        match self.regime {
            Some(ScalingRegime::Stable) | Some(ScalingRegime::StableCentered) => {
                (n * n.ln() * lnln(n)).powf(1.0 / alpha)
            }
            Some(ScalingRegime::Critical) => n * n.ln() * lnln(n),
            Some(ScalingRegime::Borderline) => (n * n.ln() * lnln(n)).sqrt(),
            Some(ScalingRegime::Gaussian) | None => (n * lnln(n)).sqrt(),
        }
    }
}

/// First `n` recorded by the fluctuation probe (`log log n` must be positive
/// and not vanishingly small).
pub const FLUCTUATION_FIRST_N: u64 = 4;

/// Running normalized sum of a single i.i.d. sequence, summarised per dyadic
/// block `[2^k, 2^{k+1})`.
///
/// Columns: `k, n_end, s_end, mean_end, liminf_ratio_end, block_min_liminf,
/// block_max_liminf, limsup_ratio_end, block_max_limsup`.
pub fn fluctuation_probe(law: &TrapLaw, n_max: u64, seed: u64) -> Result<ResultTable> {
    if n_max < 10 {
        return Err(LabError::param(
            "n_max",
            format!("must be >= 10, got {n_max}"),
        ));
    }
    let norms = Normalizers::new(law)?;
    let alpha = law.alpha().unwrap_or(f64::INFINITY);
    let mut table = ResultTable::new(&[
        "k",
        "n_end",
        "s_end",
        "mean_end",
        "liminf_ratio_end",
        "block_min_liminf",
        "block_max_liminf",
        "limsup_ratio_end",
        "block_max_limsup",
    ]);
    match *law {
        TrapLaw::Pareto { alpha } => {
            table.set_param("law", "pareto");
            table.set_param("alpha", alpha);
            let regime = ScalingRegime::from_alpha(alpha)?;
            table.set_param("regime", regime.label());
            if let Ok(c) = lil_constants(alpha, 1.0) {
                table.set_param("liminf_const", c.liminf_const);
            } else if alpha > 2.0 {
                table.set_param("lil_const", (2.0 * law.variance()).sqrt());
            }
        }
        TrapLaw::Constant { depth } => {
            table.set_param("law", "constant");
            table.set_param("depth", depth);
        }
    }
    table.set_param("n_max", n_max);
    table.set_param("seed", seed);

    let mut rng = StreamRng::new(seed, tags::SUMS, 0);
    let mut sum = KahanSum::new();
    let mut k = 0u32;
    let mut block_min = f64::INFINITY;
    let mut block_max = f64::NEG_INFINITY;
    let mut block_max_sup = f64::NEG_INFINITY;
    let mut last = (0.0, 0.0, 0.0);
    for n in 1..=n_max {
        sum.add(law.from_uniform(rng.uniform()));
        if n < FLUCTUATION_FIRST_N {
            continue;
        }
        let nf = n as f64;
        let s = sum.value();
        let c = norms.centre(s, nf);
        let r_inf = c / norms.liminf(nf, alpha);
        let r_sup = c / norms.limsup(nf, alpha);
        let block = 63 - n.leading_zeros();
        if block != k && block_min.is_finite() {
            let (s_end, inf_end, sup_end) = last;
            table.push_row(vec![
                k as f64,
                ((1u64 << (k + 1)) - 1) as f64,
                s_end,
                s_end / ((1u64 << (k + 1)) - 1) as f64,
                inf_end,
                block_min,
                block_max,
                sup_end,
                block_max_sup,
            ]);
            block_min = f64::INFINITY;
            block_max = f64::NEG_INFINITY;
            block_max_sup = f64::NEG_INFINITY;
        }
        k = block;
        block_min = block_min.min(r_inf);
        block_max = block_max.max(r_inf);
        block_max_sup = block_max_sup.max(r_sup);
        last = (s, r_inf, r_sup);
    }
    let (s_end, inf_end, sup_end) = last;
    table.push_row(vec![
        k as f64,
        n_max as f64,
        s_end,
        s_end / n_max as f64,
        inf_end,
        block_min,
        block_max,
        sup_end,
        block_max_sup,
    ]);
    Ok(table)
}

/// Leading-order growth of the median of `S_n` in the stable regimes.
pub fn median_leading_order(alpha: f64, n: f64) -> Result<f64> {
    match ScalingRegime::from_alpha(alpha)? {
        ScalingRegime::Stable => Ok(n.powf(1.0 / alpha)),
        ScalingRegime::Critical => Ok(n * n.ln()),
        ScalingRegime::StableCentered => Ok(n * alpha / (alpha - 1.0) + n.powf(1.0 / alpha)),
        _ => Err(LabError::Regime {
            alpha,
            requirement: "median asymptotics are stated for alpha in (0, 2)",
        }),
    }
}

/// Empirical median of `S_n` with a bootstrap percentile interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MedianEstimate {
    pub n: u64,
    pub median: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub leading: f64,
}

impl MedianEstimate {
    pub fn ratio(&self) -> f64 {
        self.median / self.leading
    }
}

pub const MEDIAN_MIN_REPLICATES: usize = 1000;
pub const BOOTSTRAP_RESAMPLES: usize = 200;

fn median_of(xs: &mut [f64]) -> f64 {
    let m = xs.len();
    let mid = m / 2;
    let (_, hi, _) = xs.select_nth_unstable_by(mid, f64::total_cmp);
    let hi = *hi;
    if m % 2 == 1 {
        hi
    } else {
        let lo = xs[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

pub fn median_probe(alpha: f64, ns: &[u64], m: usize, seed: u64) -> Result<Vec<MedianEstimate>> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LabError::Regime {
            alpha,
            requirement: "median asymptotics are stated for alpha in (0, 2)",
        });
    }
    if m < MEDIAN_MIN_REPLICATES {
        return Err(LabError::param(
            "median_m",
            format!("median probe needs at least {MEDIAN_MIN_REPLICATES} replicates, got {m}"),
        ));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(LabError::param("n", "n grid must be nonempty with n >= 1"));
    }
    let law = TrapLaw::pareto(alpha)?;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut sums = replicate_sums(&law, n, m, seed, tags::SUMS);
        let median = median_of(&mut sums.clone());
        let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .into_par_iter()
            .map(|b| {
                let mut rng = StreamRng::new(seed ^ n, tags::BOOTSTRAP, b as u64);
                let mut resample: Vec<f64> = (0..m).map(|_| sums[rng.below(m)]).collect();
                median_of(&mut resample)
            })
            .collect();
        let mut boots = boots;
        boots.sort_by(f64::total_cmp);
        let lo_idx = ((BOOTSTRAP_RESAMPLES as f64) * 0.025).floor() as usize;
        let hi_idx = ((BOOTSTRAP_RESAMPLES as f64) * 0.975).ceil() as usize - 1;
        sums.clear();
        out.push(MedianEstimate {
            n,
            median,
            ci_low: boots[lo_idx],
            ci_high: boots[hi_idx],
            leading: median_leading_order(alpha, n as f64)?,
        });
    }
    Ok(out)
}

pub fn median_table(alpha: f64, m: usize, seed: u64, rows: &[MedianEstimate]) -> ResultTable {
    let mut t = ResultTable::new(&["n", "median", "ci_low", "ci_high", "leading", "ratio"])
        .with_param("alpha", alpha)
        .with_param("M", m)
        .with_param("seed", seed)
        .with_param("bootstrap", BOOTSTRAP_RESAMPLES);
    for r in rows {
        t.push_row(vec![
            r.n as f64,
            r.median,
            r.ci_low,
            r.ci_high,
            r.leading,
            r.ratio(),
        ]);
    }
    t
}

pub const TAIL_MIN_REPLICATES: usize = 10_000;

/// Lower and upper tail frequencies of `S_n` relative to `v_alpha(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TailProbeResult {
    pub alpha: f64,
    pub n: u64,
    pub replicates: usize,
    pub lambdas: Vec<f64>,
    /// Estimates of `P(S_n <= v_alpha(n) / lambda)`.
    pub lower: Vec<f64>,
    /// Estimates of `P(S_n >= lambda v_alpha(n))`.
    pub upper: Vec<f64>,
    pub lower_se: Vec<f64>,
    pub upper_se: Vec<f64>,
    /// `true` where `v_alpha(n) / lambda < n`, so the lower tail is exactly 0.
    pub lower_structural_zero: Vec<bool>,
    /// Slope of `log p_up` against `log lambda`.
    pub upper_loglog_slope: Option<f64>,
    /// Slope of `log p_low` against `lambda^gamma`, `gamma = min(1, alpha)`.
    pub lower_log_slope: Option<f64>,
}

impl TailProbeResult {
    pub fn gamma(&self) -> f64 {
        self.alpha.min(1.0)
    }

    pub fn to_table(&self, seed: u64) -> ResultTable {
        let mut t = ResultTable::new(&[
            "lambda",
            "p_low",
            "p_low_se",
            "low_structural_zero",
            "p_up",
            "p_up_se",
        ])
        .with_param("alpha", self.alpha)
        .with_param("n", self.n)
        .with_param("M", self.replicates)
        .with_param("seed", seed)
        .with_param("gamma", self.gamma());
        t.add_note(format!(
            "upper_loglog_slope: {}",
            self.upper_loglog_slope
                .map_or("nan".into(), |s| s.to_string())
        ));
        t.add_note(format!(
            "lower_log_slope: {}",
            self.lower_log_slope.map_or("nan".into(), |s| s.to_string())
        ));
        for i in 0..self.lambdas.len() {
            t.push_row(vec![
                self.lambdas[i],
                self.lower[i],
                self.lower_se[i],
                if self.lower_structural_zero[i] {
                    1.0
                } else {
                    0.0
                },
                self.upper[i],
                self.upper_se[i],
            ]);
        }
        t
    }
}

pub fn tail_probe(
    alpha: f64,
    n: u64,
    lambdas: &[f64],
    m: usize,
    seed: u64,
) -> Result<TailProbeResult> {
    if lambdas.is_empty() {
        return Err(LabError::param("lambdas", "lambda grid is empty"));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l >= 1.0)) {
        return Err(LabError::param(
            "lambdas",
            format!("every lambda must be >= 1, got {l}"),
        ));
    }
    if n < 1 {
        return Err(LabError::param("n", "must be >= 1"));
    }
    if m < TAIL_MIN_REPLICATES {
        return Err(LabError::param(
            "m",
            format!("tail probe needs at least {TAIL_MIN_REPLICATES} replicates, got {m}"),
        ));
    }
    let law = TrapLaw::pareto(alpha)?;
    let v = v_alpha(n as f64, alpha)?;
    let mut sums = replicate_sums(&law, n, m, seed, tags::SUMS);
    sums.sort_by(f64::total_cmp);
    let mf = m as f64;
    let se = |p: f64| (p * (1.0 - p) / mf).sqrt();

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut structural = Vec::new();
    for &l in lambdas {
        let low_level = v / l;
        let zero = low_level < n as f64;
        let low_count = if zero {
            0
        } else {
            sums.partition_point(|&s| s <= low_level)
        };
        let up_count = m - sums.partition_point(|&s| s < l * v);
        lower.push(low_count as f64 / mf);
        upper.push(up_count as f64 / mf);
        structural.push(zero);
    }
    let gamma_exp = alpha.min(1.0);
    let (lx, ly): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&lower)
        .filter(|(_, p)| **p > 0.0)
        .map(|(l, p)| (l.powf(gamma_exp), p.ln()))
        .unzip();
    Ok(TailProbeResult {
        alpha,
        n,
        replicates: m,
        lambdas: lambdas.to_vec(),
        lower_se: lower.iter().map(|&p| se(p)).collect(),
        upper_se: upper.iter().map(|&p| se(p)).collect(),
        upper_loglog_slope: loglog_slope(lambdas, &upper),
        lower_log_slope: ols_slope(&lx, &ly),
        lower,
        upper,
        lower_structural_zero: structural,
    })
}

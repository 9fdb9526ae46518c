//! Monte Carlo distances and error moments of the central limit theorem.

use super::{quenched_environment, replicate_scenery, require_finite_variance, Mode};
use crate::env::TrapLaw;
use crate::error::{LabError, Result};
use crate::numeric::{loglog_slope, mean_and_se};
use crate::rng::{tags, StreamRng};
use crate::table::ResultTable;
use crate::walk::{
    clock_at_times, kolmogorov_distance, observe_at_times, replicate, std_normal_cdf, Method,
};

fn check_grid(times: &[f64], m: usize) -> Result<()> {
    if times.is_empty() {
        return Err(LabError::param("t", "time grid is empty"));
    }
    if times.iter().any(|&t| !(t > 0.0) || !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(LabError::param(
            "t",
            "times must be positive and strictly increasing",
        ));
    }
    if m < 2 {
        return Err(LabError::param(
            "m",
            format!("need at least 2 replicates, got {m}"),
        ));
    }
    Ok(())
}

fn law_params(t: ResultTable, law: &TrapLaw) -> ResultTable {
    match *law {
        TrapLaw::Pareto { alpha } => t.with_param("law", "pareto").with_param("alpha", alpha),
        TrapLaw::Constant { depth } => t.with_param("law", "constant").with_param("depth", depth),
    }
}

/// Kolmogorov distances of `X_t / (sigma sqrt t)` from the standard normal.
#[derive(Clone, Debug, PartialEq)]
pub struct BEResult {
    pub law: TrapLaw,
    pub mode: Mode,
    pub seed: u64,
    pub m: usize,
    /// `1 / E[tau_0]`, fixed analytically.
    pub sigma2: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

impl BEResult {
    /// Monte Carlo resolution `1 / sqrt(M)`.
    pub fn noise_floor(&self) -> f64 {
        1.0 / (self.m as f64).sqrt()
    }

    /// Slope of `log D` against `log t`.
    pub fn slope(&self) -> Option<f64> {
        loglog_slope(&self.times, &self.distances)
    }

    pub fn to_table(&self) -> ResultTable {
        let mut t = law_params(ResultTable::new(&["t", "D", "noise_floor"]), &self.law)
            .with_param("mode", self.mode.label())
            .with_param("M", self.m)
            .with_param("seed", self.seed)
            .with_param("sigma2", self.sigma2);
        if let Some(s) = self.slope() {
            t.set_param("slope", s);
        }
        for (time, d) in self.times.iter().zip(&self.distances) {
            t.push_row(vec![*time, *d, self.noise_floor()]);
        }
        t
    }
}

pub fn berry_esseen(
    law: TrapLaw,
    mode: Mode,
    times: &[f64],
    m: usize,
    seed: u64,
) -> Result<BEResult> {
    require_finite_variance(&law)?;
    check_grid(times, m)?;
    let sigma2 = 1.0 / law.mean()?;
    let shared = quenched_environment(law, seed, *times.last().unwrap());
    let paths: Vec<Vec<i64>> = replicate(m, |r| {
        let env = replicate_scenery(mode, law, &shared, seed, r);
        let mut rng = StreamRng::new(seed, tags::WALK_DIRECT, r);
        observe_at_times(Method::Direct, &env, 0, times, &mut rng)
            .into_iter()
            .map(|s| s.position)
            .collect()
    });
    let mut distances = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let scale = (sigma2 * t).sqrt();
        let mut xs: Vec<f64> = paths.iter().map(|p| p[k] as f64 / scale).collect();
        xs.sort_by(f64::total_cmp);
        distances.push(kolmogorov_distance(&xs, std_normal_cdf)?);
    }
    Ok(BEResult {
        law,
        mode,
        seed,
        m,
        sigma2,
        times: times.to_vec(),
        distances,
    })
}

/// Monte Carlo second moments across a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentResult {
    pub law: TrapLaw,
    pub mode: Mode,
    pub seed: u64,
    pub m: usize,
    pub times: Vec<f64>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
}

impl MomentResult {
    /// Fitted exponent of the estimate against `t`.
    pub fn exponent(&self) -> Option<f64> {
        loglog_slope(&self.times, &self.estimates)
    }

    pub fn to_table(&self, quantity: &str) -> ResultTable {
        let mut t = law_params(ResultTable::new(&["t", "estimate", "se"]), &self.law)
            .with_param("quantity", quantity)
            .with_param("mode", self.mode.label())
            .with_param("M", self.m)
            .with_param("seed", self.seed);
        if let Some(e) = self.exponent() {
            t.set_param("exponent", e);
        }
        for i in 0..self.times.len() {
            t.push_row(vec![self.times[i], self.estimates[i], self.std_errors[i]]);
        }
        t
    }
}

fn summarize(
    law: TrapLaw,
    mode: Mode,
    seed: u64,
    times: &[f64],
    samples: Vec<Vec<f64>>,
) -> MomentResult {
    let m = samples.len();
    let mut estimates = Vec::with_capacity(times.len());
    let mut std_errors = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let col: Vec<f64> = samples.iter().map(|s| s[k]).collect();
        let (mean, se) = mean_and_se(&col);
        estimates.push(mean);
        std_errors.push(se);
    }
    MomentResult {
        law,
        mode,
        seed,
        m,
        times: times.to_vec(),
        estimates,
        std_errors,
    }
}

/// `E[(<X>_t / t - sigma^2)^2]` with `<X>_t` the jump count.
pub fn qv_error(
    law: TrapLaw,
    mode: Mode,
    times: &[f64],
    m: usize,
    seed: u64,
) -> Result<MomentResult> {
    require_finite_variance(&law)?;
    check_grid(times, m)?;
    let sigma2 = 1.0 / law.mean()?;
    let shared = quenched_environment(law, seed, *times.last().unwrap());
    let samples = replicate(m, |r| {
        let env = replicate_scenery(mode, law, &shared, seed, r);
        let mut rng = StreamRng::new(seed, tags::WALK_DIRECT, r);
        observe_at_times(Method::Direct, &env, 0, times, &mut rng)
            .iter()
            .zip(times)
            .map(|(s, &t)| {
                let d = s.jumps as f64 / t - sigma2;
                d * d
            })
            .collect::<Vec<f64>>()
    });
    Ok(summarize(law, mode, seed, times, samples))
}

/// `E[(A_t - E[tau_0] t)^2]` for the scenery clock of the simple random walk.
pub fn scenery_error(
    law: TrapLaw,
    mode: Mode,
    times: &[f64],
    m: usize,
    seed: u64,
) -> Result<MomentResult> {
    require_finite_variance(&law)?;
    check_grid(times, m)?;
    let mu = law.mean()?;
    let shared = quenched_environment(law, seed, *times.last().unwrap());
    let samples = replicate(m, |r| {
        let env = replicate_scenery(mode, law, &shared, seed, r);
        let mut rng = StreamRng::new(seed, tags::WALK_TIMECHANGE, r);
        clock_at_times(&env, 0, times, &mut rng)
            .iter()
            .zip(times)
            .map(|(a, &t)| {
                let d = a - mu * t;
                d * d
            })
            .collect::<Vec<f64>>()
    });
    Ok(summarize(law, mode, seed, times, samples))
}

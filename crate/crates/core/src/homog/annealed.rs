//! Ensemble statistics of the on-diagonal heat kernel.

use rayon::prelude::*;

use crate::env::{Environment, TrapLaw};
use crate::error::{LabError, Result};
use crate::kernel::{generator_for, transition_rows};
use crate::numeric::mean_and_se;
use crate::rng::{derive_seed, tags};
use crate::sums::phi_alpha;
use crate::table::ResultTable;

/// `p_t(0,0) / phi_alpha(t)` for each environment (outer) and time (inner).
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRatios {
    pub law: TrapLaw,
    pub alpha: f64,
    pub seed: u64,
    pub times: Vec<f64>,
    pub ratios: Vec<Vec<f64>>,
}

impl EnsembleRatios {
    fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.ratios.iter().map(move |r| r[k])
    }

    fn header(&self, t: ResultTable) -> ResultTable {
        let t = match self.law {
            TrapLaw::Pareto { .. } => t.with_param("law", "pareto"),
            TrapLaw::Constant { depth } => {
                t.with_param("law", "constant").with_param("depth", depth)
            }
        };
        t.with_param("alpha", self.alpha)
            .with_param("n_envs", self.ratios.len())
            .with_param("seed", self.seed)
    }
}

/// Exact on-diagonal kernels in `n_envs` independent environments. `alpha`
/// selects the scaling function; for a Pareto law it must be the tail index.
pub fn ensemble_ratios(
    law: TrapLaw,
    alpha: f64,
    times: &[f64],
    n_envs: usize,
    seed: u64,
    tol: f64,
) -> Result<EnsembleRatios> {
    if let Some(a) = law.alpha() {
        if a != alpha {
            return Err(LabError::param(
                "alpha",
                format!("scaling exponent {alpha} differs from tail index {a}"),
            ));
        }
    }
    if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times[0] <= 0.0 {
        return Err(LabError::param(
            "t",
            "times must be positive and strictly increasing",
        ));
    }
    if n_envs == 0 {
        return Err(LabError::param("n_envs", "need at least one environment"));
    }
    let phis = times
        .iter()
        .map(|&t| phi_alpha(t, alpha))
        .collect::<Result<Vec<f64>>>()?;
    let t_max = *times.last().unwrap();
    let ratios = (0..n_envs as u64)
        .into_par_iter()
        .map(|i| {
            let env = Environment::from_law(law, 0, 0, derive_seed(seed, tags::ENV_ENSEMBLE, i))?;
            let (_, gen) = generator_for(&env, 0, t_max, tol)?;
            let rows = transition_rows(&gen, 0, times, tol)?;
            Ok(rows
                .iter()
                .zip(&phis)
                .map(|(r, phi)| r.density(&gen, 0) / phi)
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(EnsembleRatios {
        law,
        alpha,
        seed,
        times: times.to_vec(),
        ratios,
    })
}

/// `E[p_t(0,0)^eps] / phi_alpha(t)^eps` with its standard error.
pub fn annealed_moment(ens: &EnsembleRatios, eps: f64) -> Result<ResultTable> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(LabError::param(
            "eps",
            format!("must lie in [0, 1], got {eps}"),
        ));
    }
    if eps == 1.0 && ens.alpha <= 1.5 {
        return Err(LabError::Regime {
            alpha: ens.alpha,
            requirement: "the first moment of the heat kernel is controlled only for alpha > 3/2",
        });
    }
    let mut table = ens
        .header(ResultTable::new(&["t", "moment_ratio", "se"]))
        .with_param("eps", eps);
    for (k, &t) in ens.times.iter().enumerate() {
        let vals: Vec<f64> = ens.column(k).map(|r| r.powf(eps)).collect();
        let (m, se) = mean_and_se(&vals);
        table.push_row(vec![t, m, if se.is_nan() { 0.0 } else { se }]);
    }
    Ok(table)
}

/// Fraction of environments with `p_t(0,0) / phi_alpha(t)` in `[1/lambda, lambda]`.
pub fn tightness_probe(ens: &EnsembleRatios, lambdas: &[f64]) -> Result<ResultTable> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l >= 1.0)) {
        return Err(LabError::param("lambdas", "need values >= 1"));
    }
    let n = ens.ratios.len() as f64;
    let mut table = ens.header(ResultTable::new(&["t", "lambda", "coverage", "se"]));
    for (k, &t) in ens.times.iter().enumerate() {
        for &lambda in lambdas {
            let hits = ens
                .column(k)
                .filter(|&r| r >= 1.0 / lambda && r <= lambda)
                .count() as f64;
            let p = hits / n;
            table.push_row(vec![t, lambda, p, (p * (1.0 - p) / n).sqrt()]);
        }
    }
    Ok(table)
}

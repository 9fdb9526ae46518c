//! Sup-norm local limit error of the rescaled heat kernel.

use rayon::prelude::*;

use super::cells::CellPartition;
use crate::env::Environment;
use crate::error::{LabError, Result};
use crate::kernel::{generator_for, transition_row, transition_rows};
use crate::numeric::inclusive_grid;
use crate::table::ResultTable;
use crate::walk::std_normal_cdf;

/// Standard Gaussian heat kernel `(2 pi t)^{-1/2} exp(-x^2 / 2t)`.
pub fn gaussian_density(t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt()
}

/// Supremum of the admissible rate exponents, `(alpha - 2) / (10 (2 alpha - 1))`.
pub fn theta_sup(alpha: f64) -> f64 {
    (alpha - 2.0) / (10.0 * (2.0 * alpha - 1.0))
}

/// Half of [`theta_sup`].
pub fn default_theta(alpha: f64) -> f64 {
    theta_sup(alpha) / 2.0
}

/// Compact `(x, t)` region and its grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LcltGrid {
    pub k: f64,
    pub t1: f64,
    pub t2: f64,
    pub x_step: f64,
    pub t_step: f64,
}

impl Default for LcltGrid {
    fn default() -> Self {
        LcltGrid {
            k: 2.0,
            t1: 1.0,
            t2: 2.0,
            x_step: 0.1,
            t_step: 0.25,
        }
    }
}

impl LcltGrid {
    fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) {
            return Err(LabError::param("K", format!("must be > 0, got {}", self.k)));
        }
        if !(self.t1 > 0.0 && self.t1 <= self.t2) {
            return Err(LabError::param(
                "T1",
                format!("need 0 < T1 <= T2, got [{}, {}]", self.t1, self.t2),
            ));
        }
        if !(self.x_step > 0.0) || !(self.t_step > 0.0) {
            return Err(LabError::param("x_step", "grid steps must be > 0"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        inclusive_grid(-self.k, self.k, self.x_step)
    }

    pub fn ts(&self) -> Vec<f64> {
        inclusive_grid(self.t1, self.t2, self.t_step)
    }
}

/// `floor(n x)` with a guard against `x` landing a rounding error below a
/// lattice point.
fn lattice_site(n: u64, x: f64) -> i64 {
    (n as f64 * x + 1e-9).floor() as i64
}

#[derive(Clone, Debug, PartialEq)]
pub struct LCLTResult {
    pub grid: LcltGrid,
    pub theta: f64,
    pub ns: Vec<u64>,
    /// `E(n) = sup |E[tau] n p_{E[tau] n^2 t}(0, floor(n x)) - g_t(x)|`.
    pub errors: Vec<f64>,
    /// Location `(x, t)` of each supremum.
    pub argmax: Vec<(f64, f64)>,
}

impl LCLTResult {
    pub fn scaled_errors(&self) -> Vec<f64> {
        self.ns
            .iter()
            .zip(&self.errors)
            .map(|(&n, e)| (n as f64).powf(2.0 * self.theta / 3.0) * e)
            .collect()
    }

    pub fn to_table(&self) -> ResultTable {
        let g = self.grid;
        let mut t = ResultTable::new(&["n", "error", "scaled_error", "x_at_max", "t_at_max"])
            .with_param("K", g.k)
            .with_param("T1", g.t1)
            .with_param("T2", g.t2)
            .with_param("x_step", g.x_step)
            .with_param("t_step", g.t_step)
            .with_param("theta", self.theta);
        for (i, s) in self.scaled_errors().into_iter().enumerate() {
            t.push_row(vec![
                self.ns[i] as f64,
                self.errors[i],
                s,
                self.argmax[i].0,
                self.argmax[i].1,
            ]);
        }
        t
    }
}

pub fn lclt_error(
    env: &Environment,
    alpha: f64,
    ns: &[u64],
    grid: LcltGrid,
    theta: f64,
    tol: f64,
) -> Result<LCLTResult> {
    if !(alpha > 2.0) {
        return Err(LabError::Regime {
            alpha,
            requirement: "the quantitative local limit theorem needs alpha > 2",
        });
    }
    if !(theta > 0.0 && theta < theta_sup(alpha)) {
        return Err(LabError::param(
            "theta",
            format!("must lie in (0, {}), got {theta}", theta_sup(alpha)),
        ));
    }
    grid.validate()?;
    if ns.is_empty() || ns.contains(&0) {
        return Err(LabError::param(
            "n",
            "need a nonempty grid of positive scales",
        ));
    }
    let mu = env.mean_depth()?;
    let xs = grid.xs();
    let ts = grid.ts();
    let per_n: Vec<Result<(f64, (f64, f64))>> = ns
        .par_iter()
        .map(|&n| {
            let nf = n as f64;
            let times: Vec<f64> = ts.iter().map(|t| mu * nf * nf * t).collect();
            let (_, gen) = generator_for(env, 0, *times.last().unwrap(), tol)?;
            let rows = transition_rows(&gen, 0, &times, tol)?;
            let mut best = (-1.0, (0.0, 0.0));
            for (row, &t) in rows.iter().zip(&ts) {
                for &x in &xs {
                    let p = row.density(&gen, lattice_site(n, x));
                    let e = (mu * nf * p - gaussian_density(t, x)).abs();
                    if e > best.0 {
                        best = (e, (x, t));
                    }
                }
            }
            Ok(best)
        })
        .collect();
    let mut errors = Vec::with_capacity(ns.len());
    let mut argmax = Vec::with_capacity(ns.len());
    for r in per_n {
        let (e, at) = r?;
        errors.push(e);
        argmax.push(at);
    }
    Ok(LCLTResult {
        grid,
        theta,
        ns: ns.to_vec(),
        errors,
        argmax,
    })
}

/// Split of the local error at one `(n, x, t)` through the cell `I` holding
/// `floor(n x)`:
///
/// * `kernel_vs_cell` kernel against its cell average,
/// * `cell_mass` cell probability against the Gaussian cell mass,
/// * `cell_volume` cell volume against its mean,
/// * `gaussian_smoothing` Gaussian cell average against the Gaussian density.
///
/// The error is at most `kernel_vs_cell + cell_mass + cell_volume + gaussian_smoothing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LcltErrorTerms {
    pub error: f64,
    pub kernel_vs_cell: f64,
    pub cell_mass: f64,
    pub cell_volume: f64,
    pub gaussian_smoothing: f64,
    pub cell: (i64, i64),
}

impl LcltErrorTerms {
    pub fn total(&self) -> f64 {
        self.kernel_vs_cell + self.cell_mass + self.cell_volume + self.gaussian_smoothing
    }
}

#[allow(clippy::too_many_arguments)]
pub fn lclt_decomposition(
    env: &Environment,
    n: u64,
    x: f64,
    t: f64,
    base: f64,
    eta: f64,
    h: f64,
    tol: f64,
) -> Result<LcltErrorTerms> {
    if !(t > 0.0) {
        return Err(LabError::Domain(format!("t must be > 0, got {t}")));
    }
    let part = CellPartition::for_scale(n, base, eta, h)?;
    let mu = env.mean_depth()?;
    let nf = n as f64;
    let y = lattice_site(n, x);
    let (a, b) = part.cell_containing(y);
    let time = mu * nf * nf * t;
    let (env, gen) = generator_for(&env.extended(a, b - 1), 0, time, tol)?;
    let row = transition_row(&gen, 0, time, tol)?;
    let p = row.density(&gen, y);
    let prob_cell: f64 = (a..b).map(|z| row.prob(z)).sum();
    let vol: f64 = env.slice(a, b - 1)?.iter().sum();
    let width = (b - a) as f64;
    let sd = t.sqrt();
    let gauss_mass = std_normal_cdf(b as f64 / nf / sd) - std_normal_cdf(a as f64 / nf / sd);
    let cell_avg = nf / width * gauss_mass;
    let target = gaussian_density(t, x);
    Ok(LcltErrorTerms {
        error: (mu * nf * p - target).abs(),
        kernel_vs_cell: (mu * nf * p - mu * nf * prob_cell / vol).abs(),
        cell_mass: (mu * nf / vol * (prob_cell - gauss_mass)).abs(),
        cell_volume: cell_avg * (1.0 - mu * width / vol).abs(),
        gaussian_smoothing: (cell_avg - target).abs(),
        cell: (a, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_reference_at_origin() {
        assert!((gaussian_density(1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn theta_range_is_enforced() {
        let env = Environment::homogeneous(-5, 5).unwrap();
        let g = LcltGrid::default();
        assert!(lclt_error(&env, 3.0, &[8], g, theta_sup(3.0), 1e-10).is_err());
        assert!(lclt_error(&env, 2.0, &[8], g, 0.001, 1e-10).is_err());
        assert_eq!(default_theta(3.0), 0.01);
    }

    #[test]
    fn homogeneous_error_shrinks_with_scale() {
        let env = Environment::homogeneous(-5, 5).unwrap();
        let r = lclt_error(
            &env,
            3.0,
            &[8, 16, 32, 64],
            LcltGrid::default(),
            0.01,
            1e-10,
        )
        .unwrap();
        assert!(r.errors.windows(2).all(|w| w[1] < w[0]), "{:?}", r.errors);
        assert!(r.errors[3] < 0.02);
    }

    #[test]
    fn decomposition_bounds_the_error() {
        let env = Environment::sample(3.0, -10, 10, 17).unwrap();
        for (x, t) in [(0.0, 1.0), (0.7, 1.5), (-1.3, 2.0)] {
            let u = lclt_decomposition(&env, 20, x, t, 2.0, 0.75, 2.0, 1e-10).unwrap();
            assert!(u.error <= u.total() + 1e-12, "{u:?}");
        }
        let hom = Environment::homogeneous(0, 0).unwrap();
        let u = lclt_decomposition(&hom, 32, 0.5, 1.0, 2.0, 0.75, 2.0, 1e-10).unwrap();
        assert_eq!(u.cell_volume, 0.0);
    }
}

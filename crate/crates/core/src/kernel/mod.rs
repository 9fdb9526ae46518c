//! Exact finite-window quenched semigroup.
//!
//! The generator `L f(x) = (1 / 2 tau_x) sum_{y ~ x} (f(y) - f(x))` has total
//! jump rate `1 / tau_x <= 1`, so it is uniformized with `Lambda = 1`:
//! `P_t = sum_k Poisson(t)[k] Q^k` with `Q = I + L`. Each `Q` step is a
//! tridiagonal pass over the current support. With absorbing boundaries the
//! mass that steps off the window is tracked as leak; the returned row plus
//! leak equals the retained Poisson mass, which is within `tol` of 1.

mod checks;
mod green;
mod poisson;

pub use checks::{
    check_holder, check_volume_bounds, HolderReport, InequalityCheck, VolumeBoundReport,
    VOLUME_BOUND_TOL,
};
pub use green::{
    effective_resistance, exit_time_profile, expected_exit_time, green_closed_form, green_function,
    solve_tridiagonal,
};
pub use poisson::PoissonWeights;

use crate::env::Environment;
use crate::error::{LabError, Result};
use crate::sums::phi_alpha;
use crate::table::ResultTable;

pub const MAX_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Mass leaving the window is removed and reported as leak.
    Absorbing,
    /// Jumps off the window are suppressed.
    Reflecting,
}

/// Tridiagonal BTM rates on a window `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct Generator {
    lo: i64,
    taps: Vec<f64>,
    boundary: Boundary,
    // probability of staying put in one uniformized step, 1 - (rate out)
    stay: Vec<f64>,
    // 1 / (2 tau_x), probability of stepping to each neighbour
    half: Vec<f64>,
}

/// Uniformization constant. `tau >= 1` bounds every total rate by 1.
pub const UNIFORMIZATION_RATE: f64 = 1.0;

pub fn build_generator(
    env: &Environment,
    lo: i64,
    hi: i64,
    boundary: Boundary,
) -> Result<Generator> {
    if hi - lo + 1 < 3 {
        return Err(LabError::param(
            "window",
            format!("kernel window [{lo}, {hi}] must contain at least 3 sites"),
        ));
    }
    let taps = env.slice(lo, hi)?.to_vec();
    let half: Vec<f64> = taps.iter().map(|t| 0.5 / t).collect();
    let mut stay: Vec<f64> = taps.iter().map(|t| 1.0 - 1.0 / t).collect();
    if boundary == Boundary::Reflecting {
        let last = stay.len() - 1;
        stay[0] = 1.0 - half[0];
        stay[last] = 1.0 - half[last];
    }
    Ok(Generator {
        lo,
        taps,
        boundary,
        stay,
        half,
    })
}

impl Generator {
    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.taps.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo && x <= self.hi()
    }

    pub fn tau(&self, x: i64) -> f64 {
        self.taps[(x - self.lo) as usize]
    }

    /// Jump rate `x -> y`; zero unless `|x - y| = 1` and both are in the window
    /// (or, for an absorbing window, `y` is the cemetery just outside).
    pub fn rate(&self, x: i64, y: i64) -> f64 {
        if !self.contains(x) || (x - y).abs() != 1 {
            return 0.0;
        }
        if !self.contains(y) && self.boundary == Boundary::Reflecting {
            return 0.0;
        }
        self.half[(x - self.lo) as usize] * UNIFORMIZATION_RATE
    }

    /// Diagonal entry `L(x, x)`.
    pub fn diagonal(&self, x: i64) -> f64 {
        -(1.0 - self.stay[(x - self.lo) as usize]) * UNIFORMIZATION_RATE
    }

    /// One step of the uniformized chain on the index range `[a, b]`, writing
    /// into `next`. Returns the mass that left the window.
    #[inline]
    fn step(&self, cur: &[f64], next: &mut [f64], a: usize, b: usize) -> f64 {
        let n = cur.len();
        let na = a.saturating_sub(1);
        let nb = (b + 1).min(n - 1);
        for i in na..=nb {
            let mut v = cur[i] * self.stay[i];
            if i > 0 {
                v += cur[i - 1] * self.half[i - 1];
            }
            if i + 1 < n {
                v += cur[i + 1] * self.half[i + 1];
            }
            next[i] = v;
        }
        match self.boundary {
            Boundary::Absorbing => {
                let mut out = 0.0;
                if na == 0 {
                    out += cur[0] * self.half[0];
                }
                if nb == n - 1 {
                    out += cur[n - 1] * self.half[n - 1];
                }
                out
            }
            Boundary::Reflecting => 0.0,
        }
    }
}

/// `P_x(X_t = .)` over a generator window.
#[derive(Clone, Debug)]
pub struct KernelRow {
    pub base: i64,
    pub time: f64,
    pub lo: i64,
    pub probs: Vec<f64>,
    /// Mass absorbed at the window boundary.
    pub leak: f64,
    /// Poisson mass retained by the truncated series (`>= 1 - tol`).
    pub series_mass: f64,
    pub tol: f64,
}

impl KernelRow {
    pub fn hi(&self) -> i64 {
        self.lo + self.probs.len() as i64 - 1
    }

    pub fn prob(&self, y: i64) -> f64 {
        let i = y - self.lo;
        if i < 0 || i as usize >= self.probs.len() {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.probs
            .iter()
            .copied()
            .collect::<crate::numeric::KahanSum>()
            .value()
    }

    /// Heat kernel `p_t(x, y) = P_x(X_t = y) / tau_y`.
    pub fn density(&self, gen: &Generator, y: i64) -> f64 {
        if gen.contains(y) {
            self.prob(y) / gen.tau(y)
        } else {
            0.0
        }
    }

    pub fn to_table(&self, gen: &Generator) -> ResultTable {
        let mut t = ResultTable::new(&["y", "prob", "density"])
            .with_param("x", self.base)
            .with_param("t", self.time)
            .with_param("tol", self.tol)
            .with_param("lo", self.lo)
            .with_param("hi", self.hi())
            .with_param("leak", self.leak);
        for (i, p) in self.probs.iter().enumerate() {
            let y = self.lo + i as i64;
            t.push_row(vec![y as f64, *p, p / gen.tau(y)]);
        }
        t
    }
}

fn validate(gen: &Generator, x: i64, t: f64, tol: f64) -> Result<()> {
    if !gen.contains(x) {
        return Err(LabError::range(
            "base point",
            format!("{x} outside kernel window [{}, {}]", gen.lo(), gen.hi()),
        ));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(LabError::Domain(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if !(tol > 0.0 && tol <= MAX_TOL) {
        return Err(LabError::param(
            "tol",
            format!("must lie in (0, {MAX_TOL:e}], got {tol}"),
        ));
    }
    Ok(())
}

/// Rows `P_x(X_t = .)` for several times from one pass over the powers `Q^k`.
pub fn transition_rows(gen: &Generator, x: i64, times: &[f64], tol: f64) -> Result<Vec<KernelRow>> {
    for &t in times {
        validate(gen, x, t, tol)?;
    }
    let n = gen.len();
    let weights: Vec<PoissonWeights> = times
        .iter()
        .map(|&t| PoissonWeights::new(t * UNIFORMIZATION_RATE, tol))
        .collect();
    let k_max = weights.iter().map(PoissonWeights::right).max().unwrap_or(0);

    let mut acc = vec![vec![0.0; n]; times.len()];
    let mut leak = vec![0.0; times.len()];
    let mut cur = vec![0.0; n];
    let mut next = vec![0.0; n];
    let start = (x - gen.lo) as usize;
    cur[start] = 1.0;
    let (mut a, mut b) = (start, start);
    let mut absorbed = 0.0;

    for k in 0..=k_max {
        for (j, w) in weights.iter().enumerate() {
            let wk = w.get(k);
            if wk == 0.0 {
                continue;
            }
            let row = &mut acc[j];
            for i in a..=b {
                row[i] += wk * cur[i];
            }
            leak[j] += wk * absorbed;
        }
        if k == k_max {
            break;
        }
        absorbed += gen.step(&cur, &mut next, a, b);
        std::mem::swap(&mut cur, &mut next);
        a = a.saturating_sub(1);
        b = (b + 1).min(n - 1);
    }

    let mut rows = Vec::with_capacity(times.len());
    for (j, probs) in acc.into_iter().enumerate() {
        if gen.boundary == Boundary::Absorbing && leak[j] > 10.0 * tol {
            return Err(LabError::WindowTooSmall {
                leak: leak[j],
                limit: 10.0 * tol,
            });
        }
        rows.push(KernelRow {
            base: x,
            time: times[j],
            lo: gen.lo,
            probs,
            leak: leak[j],
            series_mass: weights[j].mass(),
            tol,
        });
    }
    Ok(rows)
}

pub fn transition_row(gen: &Generator, x: i64, t: f64, tol: f64) -> Result<KernelRow> {
    Ok(transition_rows(gen, x, &[t], tol)?
        .pop()
        .expect("one time in, one row out"))
}

pub fn heat_kernel(gen: &Generator, x: i64, y: i64, t: f64, tol: f64) -> Result<f64> {
    let row = transition_row(gen, x, t, tol)?;
    Ok(row.density(gen, y))
}

/// Half-width `h` such that a walk started at the centre leaves
/// `[-h, h]` before time `t` with probability at most `tol`.
///
/// The BTM walk is a slowed-down unit-rate simple random walk, so its range
/// is dominated by that of the SRW, and `P(max_{s<=t} |Y_s| >= h) <=
/// 4 P(Y_t >= h) <= 4 exp(-h asinh(h/t) + t (sqrt(1 + (h/t)^2) - 1))`.
pub fn safe_halfwidth(t: f64, tol: f64) -> i64 {
    if t <= 0.0 {
        return 1;
    }
    let bound = |h: f64| {
        let r = h / t;
        (4.0f64).ln() - h * r.asinh() + t * ((1.0 + r * r).sqrt() - 1.0)
    };
    let target = tol.ln();
    let mut h = 1.0f64;
    while bound(h) > target {
        h *= 2.0;
    }
    let (mut lo, mut hi) = (h / 2.0, h);
    while hi - lo > 1.0 {
        let mid = ((lo + hi) * 0.5).floor();
        if bound(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi as i64 + 1
}

/// Absorbing generator centred on `x`, wide enough that the leak up to
/// `t_max` stays below `tol`. The environment is extended when needed.
pub fn generator_for(
    env: &Environment,
    x: i64,
    t_max: f64,
    tol: f64,
) -> Result<(Environment, Generator)> {
    let h = safe_halfwidth(t_max, tol).max(2);
    let (lo, hi) = (x - h, x + h);
    let env = if env.contains(lo) && env.contains(hi) {
        env.clone()
    } else {
        env.extended(lo, hi)
    };
    let gen = build_generator(&env, lo, hi, Boundary::Absorbing)?;
    Ok((env, gen))
}

/// On-diagonal heat kernel `p_t(0, 0)` across a time grid.
///
/// Columns: `t, p, ratio_phi` and, when `alpha > 1` and `E[tau]` is finite,
/// `ratio_scaled = p / phi_alpha(E[tau] t)`.
pub fn ondiagonal_trace(
    env: &Environment,
    alpha: f64,
    times: &[f64],
    tol: f64,
) -> Result<ResultTable> {
    if times.is_empty() {
        return Err(LabError::param("t", "time grid is empty"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::param(
            "t",
            "time grid must be strictly increasing",
        ));
    }
    let t_max = *times.last().unwrap();
    let (_, gen) = generator_for(env, 0, t_max, tol)?;
    let rows = transition_rows(&gen, 0, times, tol)?;
    let mean = env.mean_depth().ok().filter(|_| alpha > 1.0);
    let mut cols = vec!["t", "p", "ratio_phi", "leak"];
    if mean.is_some() {
        cols.push("ratio_scaled");
    }
    let mut table = ResultTable::new(&cols)
        .with_param("alpha", alpha)
        .with_param("seed", env.seed())
        .with_param("tol", tol)
        .with_param("window", format!("[{},{}]", gen.lo(), gen.hi()));
    for row in rows {
        let p = row.density(&gen, 0);
        let mut r = vec![row.time, p, p / phi_alpha(row.time, alpha)?, row.leak];
        if let Some(m) = mean {
            r.push(p / phi_alpha(m * row.time, alpha)?);
        }
        table.push_row(r);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::TrapLaw;

    /// `e^{-t} I_0(t)` by its power series, in log space.
    fn bessel_oracle(t: f64) -> f64 {
        let mut total = 0.0;
        let mut k = 0.0f64;
        loop {
            let lt =
                -t + 2.0 * k * (t / 2.0).ln() - 2.0 * statrs::function::gamma::ln_gamma(k + 1.0);
            let term = lt.exp();
            total += term;
            if k > t && term < 1e-18 {
                break;
            }
            k += 1.0;
        }
        total
    }

    #[test]
    fn homogeneous_rates_are_one_half() {
        let env = Environment::homogeneous(-5, 5).unwrap();
        let g = build_generator(&env, -5, 5, Boundary::Absorbing).unwrap();
        for x in -5..=5 {
            assert_eq!(g.rate(x, x + 1), 0.5);
            assert_eq!(g.rate(x, x - 1), 0.5);
        }
        for x in -4..=4 {
            let sum = g.rate(x, x - 1) + g.rate(x, x + 1) + g.diagonal(x);
            assert_eq!(sum, 0.0);
        }
    }

    #[test]
    fn detailed_balance_on_every_edge() {
        let env = Environment::from_taps(TrapLaw::pareto(2.0).unwrap(), -1, vec![1.0, 4.0, 1.0], 0)
            .unwrap();
        let g = build_generator(&env, -1, 1, Boundary::Absorbing).unwrap();
        assert_eq!(g.rate(0, 1), 0.125);
        assert_eq!(g.rate(1, 0), 0.5);
        for x in -1..1 {
            assert_eq!(g.tau(x) * g.rate(x, x + 1), 0.5);
            assert_eq!(g.tau(x + 1) * g.rate(x + 1, x), 0.5);
        }
    }

    #[test]
    fn window_must_hold_three_sites() {
        let env = Environment::homogeneous(-5, 5).unwrap();
        assert!(matches!(
            build_generator(&env, 0, 1, Boundary::Absorbing),
            Err(LabError::Parameter {
                field: "window",
                ..
            })
        ));
        assert!(build_generator(&env, -6, 1, Boundary::Absorbing).is_err());
    }

    #[test]
    fn time_zero_is_indicator() {
        let env = Environment::sample(3.0, -10, 10, 1).unwrap();
        let g = build_generator(&env, -10, 10, Boundary::Absorbing).unwrap();
        let row = transition_row(&g, 2, 0.0, 1e-10).unwrap();
        assert_eq!(row.prob(2), 1.0);
        assert_eq!(row.total(), 1.0);
        assert_eq!(row.leak, 0.0);
    }

    #[test]
    fn argument_errors() {
        let env = Environment::homogeneous(-10, 10).unwrap();
        let g = build_generator(&env, -10, 10, Boundary::Absorbing).unwrap();
        assert!(matches!(
            transition_row(&g, 0, -1.0, 1e-8),
            Err(LabError::Domain(_))
        ));
        assert!(transition_row(&g, 0, 1.0, 1e-3).is_err());
        assert!(transition_row(&g, 0, 1.0, 0.0).is_err());
        match transition_row(&g, 0, 100.0, 1e-8) {
            Err(LabError::WindowTooSmall { leak, .. }) => assert!(leak > 1e-7),
            other => panic!("expected a leak error, got {other:?}"),
        }
    }

    #[test]
    fn homogeneous_return_probability_matches_bessel() {
        let env = Environment::homogeneous(-200, 200).unwrap();
        let g = build_generator(&env, -200, 200, Boundary::Absorbing).unwrap();
        let p = transition_row(&g, 0, 1.0, 1e-12).unwrap().prob(0);
        assert!((p - 0.465_759_607_593_640_6).abs() < 1e-10, "{p}");
        assert!((p - bessel_oracle(1.0)).abs() < 1e-10);
    }

    #[test]
    fn random_rows_are_stochastic() {
        let env = Environment::sample(3.0, -300, 300, 11).unwrap();
        let tol = 1e-10;
        let g = build_generator(&env, -300, 300, Boundary::Absorbing).unwrap();
        let row = transition_row(&g, 0, 50.0, tol).unwrap();
        let s = row.total() + row.leak;
        assert!(s <= 1.0 + tol && s >= 1.0 - tol, "{s}");
        assert!(row.probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn reflecting_window_conserves_mass() {
        let env = Environment::sample(1.5, -8, 8, 5).unwrap();
        let g = build_generator(&env, -8, 8, Boundary::Reflecting).unwrap();
        let row = transition_row(&g, 0, 40.0, 1e-10).unwrap();
        assert_eq!(row.leak, 0.0);
        assert!((row.total() - 1.0).abs() < 1e-9);
        assert_eq!(g.rate(8, 9), 0.0);
    }

    #[test]
    fn multi_time_pass_equals_single_time() {
        let env = Environment::sample(2.5, -120, 120, 3).unwrap();
        let g = build_generator(&env, -120, 120, Boundary::Absorbing).unwrap();
        let times = [0.5, 3.0, 20.0, 90.0];
        let rows = transition_rows(&g, 4, &times, 1e-11).unwrap();
        for (t, row) in times.iter().zip(&rows) {
            let single = transition_row(&g, 4, *t, 1e-11).unwrap();
            for (a, b) in row.probs.iter().zip(&single.probs) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn heat_kernel_symmetric_and_diagonal_monotone() {
        let env = Environment::sample(1.2, -150, 150, 8).unwrap();
        let tol = 1e-11;
        let g = build_generator(&env, -150, 150, Boundary::Absorbing).unwrap();
        for (x, y) in [(0, 3), (-5, 7), (10, -2)] {
            let a = heat_kernel(&g, x, y, 30.0, tol).unwrap();
            let b = heat_kernel(&g, y, x, 30.0, tol).unwrap();
            assert!((a - b).abs() <= 10.0 * tol);
        }
        let times = [1.0, 2.0, 5.0, 10.0, 40.0, 100.0];
        let rows = transition_rows(&g, 0, &times, tol).unwrap();
        let diag: Vec<f64> = rows.iter().map(|r| r.density(&g, 0)).collect();
        assert!(diag.windows(2).all(|w| w[1] <= w[0] + tol));
    }

    #[test]
    fn safe_halfwidth_controls_leak() {
        for t in [1.0, 10.0, 400.0] {
            let h = safe_halfwidth(t, 1e-10);
            let env = Environment::homogeneous(-h, h).unwrap();
            let g = build_generator(&env, -h, h, Boundary::Absorbing).unwrap();
            let row = transition_row(&g, 0, t, 1e-10).unwrap();
            assert!(row.leak <= 1e-10, "t {t} leak {}", row.leak);
        }
    }

    #[test]
    fn homogeneous_trace_approaches_gaussian() {
        let env = Environment::homogeneous(-10, 10).unwrap();
        let t = ondiagonal_trace(&env, 3.0, &[1e4], 1e-10).unwrap();
        let p = t.column("p").unwrap()[0];
        let r = p * (2.0 * std::f64::consts::PI * 1e4).sqrt();
        assert!((r - 1.0).abs() < 0.02, "{r}");
        assert!((p - bessel_oracle(1e4)).abs() < 1e-9);
    }
}

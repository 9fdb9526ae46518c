//! Monte Carlo of the trap walk.
//!
//! Two constructions are provided. The direct one holds at `x` for
//! `tau_x * Exp(1)` and then steps to a uniform neighbour. The time-change
//! one runs a unit-rate simple random walk `Y`, accumulates the scenery
//! clock `A_s = int_0^s tau_{Y_u} du` and reads off `X_t = Y_{A^{-1}(t)}`.
//! Both draw one exponential per visited site and one sign per jump, in that
//! order, so they agree path by path when fed the same stream.

mod sim;
mod stats;

pub use sim::{
    clock_at_times, exit_time, observe_at_times, replicate, sample_endpoints, Method, WalkSample,
};
pub use stats::{
    kolmogorov_distance, ks_critical_value, ks_two_sample, std_normal_cdf, KS_DKW_999,
};

use crate::env::Scenery;
use crate::error::{LabError, Result};
use crate::rng::StreamRng;

/// A piecewise-constant path on `[0, t_end]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub start: i64,
    /// `(jump time, site after the jump)`, times strictly increasing.
    pub events: Vec<(f64, i64)>,
    pub t_end: f64,
    pub env_seed: u64,
    pub replicate: u64,
}

impl Trajectory {
    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0 && t <= self.t_end) {
            return Err(LabError::range(
                "t",
                format!("{t} outside [0, {}]", self.t_end),
            ));
        }
        Ok(())
    }

    /// Number of events with jump time `<= t`.
    fn count_to(&self, t: f64) -> usize {
        self.events.partition_point(|&(s, _)| s <= t)
    }

    pub fn position_at(&self, t: f64) -> Result<i64> {
        self.check_time(t)?;
        Ok(match self.count_to(t) {
            0 => self.start,
            k => self.events[k - 1].1,
        })
    }

    pub fn end_position(&self) -> i64 {
        self.events.last().map_or(self.start, |e| e.1)
    }

    /// `<X>_t`: the number of jumps in `[0, t]`.
    pub fn quadratic_variation(&self, t: f64) -> Result<u64> {
        self.check_time(t)?;
        Ok(self.count_to(t) as u64)
    }

    /// `sum_{s <= t} |X_s - X_{s-}|^p`.
    pub fn power_variation(&self, t: f64, p: f64) -> Result<f64> {
        self.check_time(t)?;
        let k = self.count_to(t);
        let mut prev = self.start;
        let mut total = 0.0;
        for &(_, y) in &self.events[..k] {
            total += ((y - prev).abs() as f64).powf(p);
            prev = y;
        }
        Ok(total)
    }
}

/// The scenery clock `A` of a unit-rate simple random walk `Y`, known on
/// `[0, horizon]` in `Y`-time.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneryClock {
    pub start: i64,
    /// Jump times of `Y`.
    pub jump_times: Vec<f64>,
    /// `A` at each jump time.
    pub values: Vec<f64>,
    /// Site of `Y` on segment `k` (segment 0 is before the first jump).
    pub sites: Vec<i64>,
    /// `tau` of `sites[k]`, the slope of `A` on segment `k`.
    pub slopes: Vec<f64>,
    pub horizon: f64,
}

impl SceneryClock {
    fn segment(&self, s: f64) -> usize {
        self.jump_times.partition_point(|&u| u <= s)
    }

    /// `A_s`, exact on the simulated horizon.
    pub fn value_at(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s <= self.horizon) {
            return Err(LabError::range(
                "t",
                format!("{s} outside clock horizon [0, {}]", self.horizon),
            ));
        }
        let k = self.segment(s);
        let (s0, a0) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.jump_times[k - 1], self.values[k - 1])
        };
        Ok(a0 + self.slopes[k] * (s - s0))
    }

    /// `A^{-1}(a)`; `A` is continuous and strictly increasing so the
    /// right-continuous inverse is the ordinary one.
    pub fn inverse(&self, a: f64) -> Result<f64> {
        let a_max = self.value_at(self.horizon)?;
        if !(a >= 0.0 && a <= a_max) {
            return Err(LabError::range(
                "a",
                format!("{a} outside clock range [0, {a_max}]"),
            ));
        }
        let k = self.values.partition_point(|&v| v <= a);
        let (s0, a0) = if k == 0 {
            (0.0, 0.0)
        } else {
            (self.jump_times[k - 1], self.values[k - 1])
        };
        Ok(s0 + (a - a0) / self.slopes[k])
    }

    pub fn site_at(&self, s: f64) -> i64 {
        self.sites[self.segment(s)]
    }
}

pub fn scenery_functional(clock: &SceneryClock, s: f64) -> Result<f64> {
    clock.value_at(s)
}

fn check_horizon(t: f64) {
    assert!(
        t >= 0.0 && t.is_finite(),
        "time horizon must be finite and >= 0, got {t}"
    );
}

pub fn simulate_direct<S: Scenery + ?Sized>(
    env: &S,
    x0: i64,
    t_end: f64,
    rng: &mut StreamRng,
) -> Trajectory {
    check_horizon(t_end);
    let mut events = Vec::new();
    let mut x = x0;
    let mut t = env.tau(x) * rng.exp1();
    while t <= t_end {
        x += rng.sign();
        events.push((t, x));
        t += env.tau(x) * rng.exp1();
    }
    Trajectory {
        start: x0,
        events,
        t_end,
        env_seed: 0,
        replicate: 0,
    }
}

/// Run `Y` until its clock passes `a_stop`, or until `Y`-time `s_stop`.
fn run_clock<S: Scenery + ?Sized>(
    env: &S,
    y0: i64,
    a_stop: f64,
    s_stop: f64,
    rng: &mut StreamRng,
) -> SceneryClock {
    let mut clock = SceneryClock {
        start: y0,
        jump_times: Vec::new(),
        values: Vec::new(),
        sites: vec![y0],
        slopes: vec![env.tau(y0)],
        horizon: 0.0,
    };
    let (mut s, mut a, mut y) = (0.0f64, 0.0f64, y0);
    loop {
        let e = rng.exp1();
        let tau = *clock.slopes.last().unwrap();
        let a_next = a + tau * e;
        let s_next = s + e;
        if a_next > a_stop || s_next > s_stop {
            // the clock is known up to the end of the current holding interval
            clock.horizon = s_next.min(s_stop);
            return clock;
        }
        y += rng.sign();
        s = s_next;
        a = a_next;
        clock.jump_times.push(s);
        clock.values.push(a);
        clock.sites.push(y);
        clock.slopes.push(env.tau(y));
    }
}

/// Clock of the simple random walk on the `Y`-time horizon `[0, s_end]`.
pub fn simulate_clock<S: Scenery + ?Sized>(
    env: &S,
    y0: i64,
    s_end: f64,
    rng: &mut StreamRng,
) -> SceneryClock {
    check_horizon(s_end);
    run_clock(env, y0, f64::INFINITY, s_end, rng)
}

/// `X = Y o A^{-1}` on `[0, t_end]`, returned with the clock that built it.
pub fn simulate_timechange_with_clock<S: Scenery + ?Sized>(
    env: &S,
    x0: i64,
    t_end: f64,
    rng: &mut StreamRng,
) -> (Trajectory, SceneryClock) {
    check_horizon(t_end);
    let clock = run_clock(env, x0, t_end, f64::INFINITY, rng);
    let events = clock
        .values
        .iter()
        .copied()
        .zip(clock.sites[1..].iter().copied())
        .collect();
    let traj = Trajectory {
        start: x0,
        events,
        t_end,
        env_seed: 0,
        replicate: 0,
    };
    (traj, clock)
}

pub fn simulate_timechange<S: Scenery + ?Sized>(
    env: &S,
    x0: i64,
    t_end: f64,
    rng: &mut StreamRng,
) -> Trajectory {
    simulate_timechange_with_clock(env, x0, t_end, rng).0
}

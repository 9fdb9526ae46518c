//! Memory-flat observers for bulk runs.

use rayon::prelude::*;

use crate::env::Scenery;
use crate::rng::{tags, StreamRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Direct,
    TimeChange,
}

impl Method {
    pub fn stream_tag(self) -> u64 {
        match self {
            Method::Direct => tags::WALK_DIRECT,
            Method::TimeChange => tags::WALK_TIMECHANGE,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::TimeChange => "timechange",
        }
    }
}

/// State of the walk at one observation time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkSample {
    pub position: i64,
    pub jumps: u64,
}

fn check_grid(times: &[f64]) {
    assert!(
        times.windows(2).all(|w| w[0] <= w[1]) && times.first().is_none_or(|&t| t >= 0.0),
        "observation times must be nondecreasing and >= 0"
    );
}

/// Position and jump count at each of the (nondecreasing) `times`.
pub fn observe_at_times<S: Scenery + ?Sized>(
    method: Method,
    env: &S,
    x0: i64,
    times: &[f64],
    rng: &mut StreamRng,
) -> Vec<WalkSample> {
    check_grid(times);
    let mut out = Vec::with_capacity(times.len());
    let mut x = x0;
    let mut jumps = 0u64;
    match method {
        Method::Direct => {
            let mut next = env.tau(x) * rng.exp1();
            for &t in times {
                while next <= t {
                    x += rng.sign();
                    jumps += 1;
                    next += env.tau(x) * rng.exp1();
                }
                out.push(WalkSample { position: x, jumps });
            }
        }
        Method::TimeChange => {
            // Y-time `s` and clock `a` at the last jump of Y; the pending
            // unit-rate holding `e` ends at Y-time s + e, clock a + tau e.
            let (mut s, mut a) = (0.0f64, 0.0f64);
            let mut e = rng.exp1();
            for &t in times {
                loop {
                    let a_next = a + env.tau(x) * e;
                    if a_next > t {
                        break;
                    }
                    s += e;
                    a = a_next;
                    x += rng.sign();
                    jumps += 1;
                    e = rng.exp1();
                }
                out.push(WalkSample { position: x, jumps });
            }
            debug_assert!(a >= s);
        }
    }
    out
}

/// Scenery clock `A_s` of the unit-rate simple random walk at each `Y`-time.
pub fn clock_at_times<S: Scenery + ?Sized>(
    env: &S,
    y0: i64,
    times: &[f64],
    rng: &mut StreamRng,
) -> Vec<f64> {
    check_grid(times);
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    let (mut s, mut a) = (0.0f64, 0.0f64);
    let mut tau = env.tau(y);
    let mut next = rng.exp1();
    for &t in times {
        while next <= t {
            a += tau * (next - s);
            s = next;
            y += rng.sign();
            tau = env.tau(y);
            next = s + rng.exp1();
        }
        out.push(a + tau * (t - s));
    }
    out
}

/// First time `|X - center| >= n`, started from `x0` inside the ball.
pub fn exit_time<S: Scenery + ?Sized>(
    env: &S,
    center: i64,
    n: i64,
    x0: i64,
    rng: &mut StreamRng,
) -> f64 {
    let mut x = x0;
    let mut t = 0.0;
    while (x - center).abs() < n {
        t += env.tau(x) * rng.exp1();
        x += rng.sign();
    }
    t
}

/// `f(0), ..., f(m - 1)` in parallel, collected in index order.
pub fn replicate<T, F>(m: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..m as u64).into_par_iter().map(f).collect()
}

/// Endpoints `X_t` of `m` independent walks from 0 in one environment.
pub fn sample_endpoints<S: Scenery + ?Sized>(
    method: Method,
    env: &S,
    t: f64,
    m: usize,
    seed: u64,
) -> Vec<i64> {
    let tag = method.stream_tag();
    replicate(m, |r| {
        let mut rng = StreamRng::new(seed, tag, r);
        observe_at_times(method, env, 0, &[t], &mut rng)[0].position
    })
}

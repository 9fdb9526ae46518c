//! Killed Green function and exit times on the ball `B(x, n) = {|w - x| < n}`.

use crate::env::Environment;
use crate::error::{LabError, Result};

/// Thomas algorithm for `sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i]`.
/// `sub[0]` and `sup[last]` are ignored. The systems solved here are
/// diagonally dominant, so no pivoting is needed.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    assert!(sub.len() == m && sup.len() == m && rhs.len() == m);
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut denom = diag[0];
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..m {
        denom = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut u = d;
    for i in (0..m.saturating_sub(1)).rev() {
        u[i] -= c[i] * u[i + 1];
    }
    u
}

fn check_radius(n: i64) -> Result<()> {
    if n <= 0 {
        return Err(LabError::param(
            "n",
            format!("ball radius must be >= 1, got {n}"),
        ));
    }
    Ok(())
}

fn inside(x: i64, n: i64, y: i64) -> bool {
    (y - x).abs() < n
}

/// Solve `-L u = f` on the ball with `u = 0` outside; `f` indexed from `x - n + 1`.
fn solve_killed(env: &Environment, x: i64, n: i64, f: &[f64]) -> Result<Vec<f64>> {
    let taps = env.slice(x - n + 1, x + n - 1)?;
    let diag: Vec<f64> = taps.iter().map(|t| 1.0 / t).collect();
    let off: Vec<f64> = taps.iter().map(|t| -0.5 / t).collect();
    Ok(solve_tridiagonal(&off, &diag, &off, f))
}

/// `E_y[time spent at z before leaving B(x, n)] / tau_z`.
pub fn green_function(env: &Environment, x: i64, n: i64, y: i64, z: i64) -> Result<f64> {
    check_radius(n)?;
    if !inside(x, n, y) || !inside(x, n, z) {
        return Ok(0.0);
    }
    let m = (2 * n - 1) as usize;
    let mut rhs = vec![0.0; m];
    rhs[(z - x + n - 1) as usize] = 1.0;
    let u = solve_killed(env, x, n, &rhs)?;
    Ok(u[(y - x + n - 1) as usize] / env.get(z)?)
}

/// Mean exit time from `B(x, n)` for every start in the ball, from `x - n + 1`.
pub fn exit_time_profile(env: &Environment, x: i64, n: i64) -> Result<Vec<f64>> {
    check_radius(n)?;
    let m = (2 * n - 1) as usize;
    solve_killed(env, x, n, &vec![1.0; m])
}

pub fn expected_exit_time(env: &Environment, x: i64, n: i64, y: i64) -> Result<f64> {
    check_radius(n)?;
    if !inside(x, n, y) {
        return Ok(0.0);
    }
    Ok(exit_time_profile(env, x, n)?[(y - x + n - 1) as usize])
}

/// Closed form of the killed Green function. It does not depend on the
/// environment: `(n + a)(n - b) / n` with `a = min(y, z) - x`, `b = max(y, z) - x`.
pub fn green_closed_form(x: i64, n: i64, y: i64, z: i64) -> f64 {
    if n <= 0 || !inside(x, n, y) || !inside(x, n, z) {
        return 0.0;
    }
    let a = (y.min(z) - x) as f64;
    let b = (y.max(z) - x) as f64;
    let n = n as f64;
    (n + a) * (n - b) / n
}

/// Effective resistance between `x` and the complement of `B(x, n)` with unit
/// conductances: two arms of `n` unit resistors in parallel.
pub fn effective_resistance(n: u64) -> f64 {
    n as f64 / 2.0
}

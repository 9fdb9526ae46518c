//! Direct evaluation of the volume-based on-diagonal bounds and of the
//! Hölder continuity ratio.

use std::ops::RangeInclusive;

use super::{generator_for, transition_rows};
use crate::env::Environment;
use crate::error::{LabError, Result};
use crate::table::ResultTable;

/// Slack below which an inequality is still reported as holding; covers
/// kernel truncation and rounding.
pub const VOLUME_BOUND_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InequalityCheck {
    pub time: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the inequality holds strictly.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn upper(time: f64, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        InequalityCheck {
            time,
            lhs,
            rhs,
            slack,
            holds: slack >= -VOLUME_BOUND_TOL,
        }
    }

    fn lower(time: f64, lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        InequalityCheck {
            time,
            lhs,
            rhs,
            slack,
            holds: slack >= -VOLUME_BOUND_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeBoundReport {
    pub x: i64,
    pub n: u64,
    /// `p_{2 n V(x,n)}(x,x) <= 2 / V(x, n-1)`.
    pub upper: InequalityCheck,
    /// `p_{n V(x,n) / 2}(x,x) >= V(x,n)^2 / (16 V(x,2n)^3)`.
    pub lower: InequalityCheck,
}

impl VolumeBoundReport {
    pub fn holds(&self) -> bool {
        self.upper.holds && self.lower.holds
    }

    pub fn to_table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["bound", "time", "lhs", "rhs", "slack", "holds"])
            .with_param("x", self.x)
            .with_param("n", self.n);
        t.add_note("bound 0: upper on-diagonal bound, bound 1: lower on-diagonal bound");
        for (i, c) in [self.upper, self.lower].iter().enumerate() {
            t.push_row(vec![
                i as f64,
                c.time,
                c.lhs,
                c.rhs,
                c.slack,
                c.holds as u8 as f64,
            ]);
        }
        t
    }
}

pub fn check_volume_bounds(
    env: &Environment,
    x: i64,
    n: u64,
    tol: f64,
) -> Result<VolumeBoundReport> {
    if n < 2 {
        return Err(LabError::param("n", format!("must be >= 2, got {n}")));
    }
    let ext = env.extended(x - 2 * n as i64, x + 2 * n as i64);
    let v_n = ext.volume(x, n)?;
    let v_prev = ext.volume(x, n - 1)?;
    let v_2n = ext.volume(x, 2 * n)?;
    let t_low = n as f64 * v_n / 2.0;
    let t_up = 2.0 * n as f64 * v_n;
    let (_, gen) = generator_for(&ext, x, t_up, tol)?;
    let rows = transition_rows(&gen, x, &[t_low, t_up], tol)?;
    let p_low = rows[0].density(&gen, x);
    let p_up = rows[1].density(&gen, x);
    Ok(VolumeBoundReport {
        x,
        n,
        upper: InequalityCheck::upper(t_up, p_up, 2.0 / v_prev),
        lower: InequalityCheck::lower(t_low, p_low, v_n * v_n / (16.0 * v_2n.powi(3))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderReport {
    pub time: f64,
    /// `max |p_t(0,x) - p_t(0,y)|^2 / (|x - y| t^{-3/2})` over the pairs.
    pub constant: f64,
    pub argmax: (i64, i64),
}

pub fn check_holder(
    env: &Environment,
    t: f64,
    sites: RangeInclusive<i64>,
    tol: f64,
) -> Result<HolderReport> {
    if !(t >= 1.0) {
        return Err(LabError::param("t", format!("must be >= 1, got {t}")));
    }
    let (a, b) = (*sites.start(), *sites.end());
    if a > b {
        return Err(LabError::param("sites", "empty site range"));
    }
    let (_, gen) = generator_for(&env.extended(a.min(-1), b.max(1)), 0, t, tol)?;
    let row = transition_rows(&gen, 0, &[t], tol)?.pop().unwrap();
    let dens: Vec<f64> = (a..=b).map(|y| row.density(&gen, y)).collect();
    let scale = t.powf(-1.5);
    let mut best = (0.0, (a, a));
    for i in 0..dens.len() {
        for j in i + 1..dens.len() {
            let d = dens[i] - dens[j];
            let r = d * d / ((j - i) as f64 * scale);
            if r > best.0 {
                best = (r, (a + i as i64, a + j as i64));
            }
        }
    }
    Ok(HolderReport {
        time: t,
        constant: best.0,
        argmax: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_bounds_hold() {
        let env = Environment::homogeneous(-10, 10).unwrap();
        let r = check_volume_bounds(&env, 0, 4, 1e-10).unwrap();
        assert!(r.holds());
        assert!(r.upper.slack > 0.0 && r.lower.slack > 0.0);
        assert_eq!(r.upper.time, 72.0);
    }

    #[test]
    fn single_site_range_has_zero_constant() {
        let env = Environment::homogeneous(-10, 10).unwrap();
        let h = check_holder(&env, 10.0, 3..=3, 1e-10).unwrap();
        assert_eq!(h.constant, 0.0);
    }

    #[test]
    fn homogeneous_holder_constant_is_stable() {
        let env = Environment::homogeneous(-10, 10).unwrap();
        let c10 = check_holder(&env, 10.0, -20..=20, 1e-10).unwrap().constant;
        let c100 = check_holder(&env, 100.0, -40..=40, 1e-10).unwrap().constant;
        assert!(c10.is_finite() && c100.is_finite());
        let r = c10.max(c100) / c10.min(c100);
        assert!(r < 3.0, "{c10} {c100}");
    }
}

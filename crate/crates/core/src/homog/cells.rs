//! Mesoscopic cell partitions of a macroscopic ball.

use crate::env::Environment;
use crate::error::{LabError, Result};
use crate::numeric::ols_slope;
use crate::table::ResultTable;

/// Cells `[x_{i-1}, x_i)` with `x_i = i w`, `w = floor(a^{eta N})`, covering
/// `[-R, R]` with `R = ceil(h a^{N+1})`.
///
/// Cells are half-open so each site belongs to exactly one cell and
/// `sum_I V(I)` is the volume of the covered range.
#[derive(Clone, Debug, PartialEq)]
pub struct CellPartition {
    pub level: u32,
    pub base: f64,
    pub eta: f64,
    pub h: f64,
    pub width: i64,
    pub radius: i64,
    first: i64,
    last: i64,
}

impl CellPartition {
    pub fn new(base: f64, eta: f64, h: f64, level: u32) -> Result<Self> {
        if !(base > 1.0) || !base.is_finite() {
            return Err(LabError::param("a", format!("must be > 1, got {base}")));
        }
        if !(eta > 0.5 && eta < 1.0) {
            return Err(LabError::param(
                "eta",
                format!("must lie in (1/2, 1), got {eta}"),
            ));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(LabError::param("h", format!("must be > 0, got {h}")));
        }
        let width = base.powf(eta * level as f64).floor();
        let radius = (h * base.powi(level as i32 + 1)).ceil();
        if width > 1e12 || radius > 1e12 {
            return Err(LabError::param(
                "N",
                format!("level {level} gives cells too large to store"),
            ));
        }
        let (width, radius) = (width as i64, radius as i64);
        Ok(CellPartition {
            level,
            base,
            eta,
            h,
            width,
            radius,
            first: (-radius).div_euclid(width),
            last: radius.div_euclid(width),
        })
    }

    /// Partition for spatial scale `n in [a^N, a^{N+1})`.
    pub fn for_scale(n: u64, base: f64, eta: f64, h: f64) -> Result<Self> {
        if n == 0 {
            return Err(LabError::param("n", "scale must be >= 1"));
        }
        let mut level = ((n as f64).ln() / base.ln()).floor().max(0.0) as u32;
        // guard the floor against rounding at exact powers
        while base.powi(level as i32 + 1) <= n as f64 {
            level += 1;
        }
        while level > 0 && base.powi(level as i32) > n as f64 {
            level -= 1;
        }
        Self::new(base, eta, h, level)
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-open cell bounds `(lo, hi)`.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.first..=self.last).map(move |i| (i * self.width, (i + 1) * self.width))
    }

    pub fn cell_containing(&self, y: i64) -> (i64, i64) {
        let i = y.div_euclid(self.width);
        (i * self.width, (i + 1) * self.width)
    }

    /// Smallest and largest covered sites.
    pub fn span(&self) -> (i64, i64) {
        (self.first * self.width, (self.last + 1) * self.width - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellVolumeReport {
    pub level: u32,
    pub width: i64,
    pub cells: usize,
    /// `sup_I |V(I) - E[tau_0] |I||`.
    pub sup_deviation: f64,
    /// `a^{kappa N}`.
    pub scale: f64,
    pub implied_constant: f64,
}

pub fn cell_volume_check(
    env: &Environment,
    partition: &CellPartition,
    kappa: f64,
) -> Result<CellVolumeReport> {
    if !(kappa > 0.5 && kappa < partition.eta) {
        return Err(LabError::param(
            "kappa",
            format!("must lie in (1/2, eta = {}), got {kappa}", partition.eta),
        ));
    }
    let mean = env.mean_depth()?;
    let (lo, hi) = partition.span();
    let env = env.extended(lo, hi);
    let mut sup = 0.0f64;
    for (a, b) in partition.cells() {
        let v = env.mass(a, b)?;
        sup = sup.max((v - mean * (b - a) as f64).abs());
    }
    let scale = partition.base.powf(kappa * partition.level as f64);
    Ok(CellVolumeReport {
        level: partition.level,
        width: partition.width,
        cells: partition.len(),
        sup_deviation: sup,
        scale,
        implied_constant: sup / scale,
    })
}

/// Cell volume deviations across levels, with the fitted growth rate of
/// `ln(sup deviation)` per level in the `slope` parameter.
pub fn cell_volume_scan(
    env: &Environment,
    base: f64,
    eta: f64,
    h: f64,
    kappa: f64,
    levels: &[u32],
) -> Result<ResultTable> {
    if levels.is_empty() {
        return Err(LabError::param("N", "level list is empty"));
    }
    let mut table = ResultTable::new(&[
        "N",
        "width",
        "cells",
        "sup_deviation",
        "scale",
        "implied_constant",
    ])
    .with_param("a", base)
    .with_param("eta", eta)
    .with_param("h", h)
    .with_param("kappa", kappa)
    .with_param("seed", env.seed());
    if let Some(alpha) = env.alpha() {
        table.set_param("alpha", alpha);
    }
    let (mut ns, mut logs) = (Vec::new(), Vec::new());
    for &n in levels {
        let p = CellPartition::new(base, eta, h, n)?;
        let r = cell_volume_check(env, &p, kappa)?;
        if r.sup_deviation > 0.0 {
            ns.push(n as f64);
            logs.push(r.sup_deviation.ln());
        }
        table.push_row(vec![
            n as f64,
            r.width as f64,
            r.cells as f64,
            r.sup_deviation,
            r.scale,
            r.implied_constant,
        ]);
    }
    if let Some(s) = ols_slope(&ns, &logs) {
        table.set_param("slope", s);
        table.set_param("kappa_log_a", kappa * base.ln());
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_tile_the_ball() {
        let p = CellPartition::new(2.0, 0.75, 1.0, 8).unwrap();
        assert_eq!(p.width, 64);
        assert_eq!(p.radius, 512);
        let (lo, hi) = p.span();
        assert!(lo <= -512 && hi >= 512);
        let mut next = lo;
        for (a, b) in p.cells() {
            assert_eq!(a, next);
            assert_eq!(b - a, 64);
            next = b;
        }
        assert_eq!(p.cell_containing(-1), (-64, 0));
        assert_eq!(p.cell_containing(0), (0, 64));
    }

    #[test]
    fn scale_picks_the_level() {
        assert_eq!(
            CellPartition::for_scale(64, 2.0, 0.75, 1.0).unwrap().level,
            6
        );
        assert_eq!(
            CellPartition::for_scale(63, 2.0, 0.75, 1.0).unwrap().level,
            5
        );
        assert_eq!(
            CellPartition::for_scale(1, 2.0, 0.75, 1.0).unwrap().level,
            0
        );
    }

    #[test]
    fn constant_scenery_has_zero_deviation() {
        let env = Environment::homogeneous(0, 0).unwrap();
        for n in 4..10 {
            let p = CellPartition::new(2.0, 0.75, 1.0, n).unwrap();
            assert_eq!(cell_volume_check(&env, &p, 0.6).unwrap().sup_deviation, 0.0);
        }
    }

    #[test]
    fn kappa_range_enforced() {
        let env = Environment::homogeneous(0, 0).unwrap();
        let p = CellPartition::new(2.0, 0.75, 1.0, 5).unwrap();
        assert!(cell_volume_check(&env, &p, 0.5).is_err());
        assert!(cell_volume_check(&env, &p, 0.75).is_err());
        assert!(CellPartition::new(2.0, 0.5, 1.0, 5).is_err());
    }
}

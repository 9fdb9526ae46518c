//! Quantitative homogenization measurements for `alpha > 2` (and the
//! annealed on-diagonal statistics, which need no variance).

mod annealed;
mod cells;
mod clt;
mod lclt;

pub use annealed::{annealed_moment, ensemble_ratios, tightness_probe, EnsembleRatios};
pub use cells::{cell_volume_check, cell_volume_scan, CellPartition, CellVolumeReport};
pub use clt::{berry_esseen, qv_error, scenery_error, BEResult, MomentResult};
pub use lclt::{
    default_theta, gaussian_density, lclt_decomposition, lclt_error, theta_sup, LCLTResult,
    LcltErrorTerms, LcltGrid,
};

use crate::env::{Environment, LazyScenery, Scenery, TrapLaw};
use crate::error::{LabError, Result};
use crate::rng::{derive_seed, tags};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One environment shared by every replicate.
    Quenched,
    /// A fresh environment for every replicate.
    Annealed,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Quenched => "quenched",
            Mode::Annealed => "annealed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "quenched" => Ok(Mode::Quenched),
            "annealed" => Ok(Mode::Annealed),
            _ => Err(LabError::param(
                "mode",
                format!("expected quenched or annealed, got `{s}`"),
            )),
        }
    }
}

/// Reject laws without a finite variance; the degenerate law passes.
pub(crate) fn require_finite_variance(law: &TrapLaw) -> Result<()> {
    match law.alpha() {
        Some(alpha) if alpha <= 2.0 => Err(LabError::Regime {
            alpha,
            requirement: "second-moment homogenization estimates need alpha > 2",
        }),
        _ => Ok(()),
    }
}

/// Landscape seen by replicate `r`.
pub(crate) enum ReplicateScenery<'a> {
    Shared(&'a Environment),
    Fresh(LazyScenery),
}

impl Scenery for ReplicateScenery<'_> {
    #[inline]
    fn tau(&self, x: i64) -> f64 {
        match self {
            ReplicateScenery::Shared(e) => e.tau(x),
            ReplicateScenery::Fresh(l) => l.tau(x),
        }
    }
}

pub(crate) fn replicate_scenery<'a>(
    mode: Mode,
    law: TrapLaw,
    shared: &'a Environment,
    seed: u64,
    r: u64,
) -> ReplicateScenery<'a> {
    match mode {
        Mode::Quenched => ReplicateScenery::Shared(shared),
        Mode::Annealed => ReplicateScenery::Fresh(LazyScenery {
            law,
            seed: derive_seed(seed, tags::ANNEALED_ENV, r),
        }),
    }
}

/// Stored window large enough that a walk up to `t_max` rarely reads past it.
/// Reads past it still see the same landscape.
pub(crate) fn quenched_environment(law: TrapLaw, seed: u64, t_max: f64) -> Environment {
    let h = crate::kernel::safe_halfwidth(t_max, 1e-12).min(1 << 20);
    Environment::from_law(law, -h, h, seed).expect("nonempty window")
}

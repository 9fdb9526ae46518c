//! Trap landscapes.
//!
//! An [`Environment`] is a contiguous window of i.i.d. trap depths
//! `tau_x >= 1` with Pareto tail `P[tau >= u] = u^{-alpha}`. Each site is
//! drawn by inversion from a counter-based uniform keyed on `(seed, site)`,
//! so a larger window with the same seed agrees with a smaller one on their
//! overlap, and walks that leave the stored window can keep reading depths.

use std::io::{BufRead, Write};

use crate::error::{LabError, Result};
use crate::numeric::KahanSum;
use crate::rng::site_uniform;

/// Distribution of a single trap depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrapLaw {
    /// `P[tau >= u] = u^{-alpha}` for `u >= 1`.
    Pareto { alpha: f64 },
    /// Degenerate landscape `tau == depth` (homogeneous control runs).
    Constant { depth: f64 },
}

impl TrapLaw {
    pub fn pareto(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(LabError::param(
                "alpha",
                format!("must be finite and > 0, got {alpha}"),
            ));
        }
        Ok(TrapLaw::Pareto { alpha })
    }

    pub fn constant(depth: f64) -> Result<Self> {
        if !(depth >= 1.0) || !depth.is_finite() {
            return Err(LabError::param(
                "depth",
                format!("must be finite and >= 1, got {depth}"),
            ));
        }
        Ok(TrapLaw::Constant { depth })
    }

    /// Inverse-CDF map from a uniform on (0, 1].
    #[inline]
    pub fn from_uniform(&self, u: f64) -> f64 {
        match *self {
            TrapLaw::Pareto { alpha } => u.powf(-1.0 / alpha),
            TrapLaw::Constant { depth } => depth,
        }
    }

    /// Tail exponent, `None` for the degenerate law.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            TrapLaw::Pareto { alpha } => Some(alpha),
            TrapLaw::Constant { .. } => None,
        }
    }

    /// `E[tau_0]`.
    pub fn mean(&self) -> Result<f64> {
        match *self {
            TrapLaw::Pareto { alpha } => mean_trap(alpha),
            TrapLaw::Constant { depth } => Ok(depth),
        }
    }

    /// `Var(tau_0)`; infinite for `alpha <= 2`.
    pub fn variance(&self) -> f64 {
        match *self {
            TrapLaw::Pareto { alpha } if alpha > 2.0 => {
                let m = alpha / (alpha - 1.0);
                alpha / (alpha - 2.0) - m * m
            }
            TrapLaw::Pareto { .. } => f64::INFINITY,
            TrapLaw::Constant { .. } => 0.0,
        }
    }

    /// Depth at `site` for a landscape seeded with `seed`.
    #[inline]
    pub fn site_depth(&self, seed: u64, site: i64) -> f64 {
        match *self {
            TrapLaw::Constant { depth } => depth,
            _ => self.from_uniform(site_uniform(seed, site)),
        }
    }
}

/// Anything that assigns a trap depth to every lattice site.
pub trait Scenery: Sync {
    fn tau(&self, x: i64) -> f64;
}

/// Landscape with no storage: every lookup recomputes the per-site draw.
/// Used for annealed replicates, where each walk sees a fresh landscape.
#[derive(Clone, Copy, Debug)]
pub struct LazyScenery {
    pub law: TrapLaw,
    pub seed: u64,
}

impl Scenery for LazyScenery {
    #[inline]
    fn tau(&self, x: i64) -> f64 {
        self.law.site_depth(self.seed, x)
    }
}

/// A windowed realization of the trap landscape.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    law: TrapLaw,
    seed: u64,
    offset: i64,
    // site `y` of this environment reads the per-site draw at `y + shift`
    shift: i64,
    taps: Vec<f64>,
}

impl Environment {
    /// Draw `tau_x` for every `x` in `[lo, hi]`.
    pub fn sample(alpha: f64, lo: i64, hi: i64, seed: u64) -> Result<Self> {
        Self::from_law(TrapLaw::pareto(alpha)?, lo, hi, seed)
    }

    /// `tau == 1` on `[lo, hi]`.
    pub fn homogeneous(lo: i64, hi: i64) -> Result<Self> {
        Self::from_law(TrapLaw::Constant { depth: 1.0 }, lo, hi, 0)
    }

    pub fn from_law(law: TrapLaw, lo: i64, hi: i64, seed: u64) -> Result<Self> {
        if lo > hi {
            return Err(LabError::param(
                "window",
                format!("empty window [{lo}, {hi}]"),
            ));
        }
        let taps = (lo..=hi).map(|x| law.site_depth(seed, x)).collect();
        Ok(Environment {
            law,
            seed,
            offset: lo,
            shift: 0,
            taps,
        })
    }

    /// Build from explicit depths. Sites outside the window fall back to the
    /// per-site draw of `(law, seed)`.
    pub fn from_taps(law: TrapLaw, offset: i64, taps: Vec<f64>, seed: u64) -> Result<Self> {
        if taps.is_empty() {
            return Err(LabError::param(
                "taps",
                "environment must contain at least one site",
            ));
        }
        if let Some((i, t)) = taps
            .iter()
            .enumerate()
            .find(|(_, t)| !(**t >= 1.0) || !t.is_finite())
        {
            return Err(LabError::param(
                "taps",
                format!(
                    "tau at site {} is {t}, must be finite and >= 1",
                    offset + i as i64
                ),
            ));
        }
        Ok(Environment {
            law,
            seed,
            offset,
            shift: 0,
            taps,
        })
    }

    pub fn law(&self) -> TrapLaw {
        self.law
    }

    pub fn alpha(&self) -> Option<f64> {
        self.law.alpha()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn lo(&self) -> i64 {
        self.offset
    }

    pub fn hi(&self) -> i64 {
        self.offset + self.taps.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    pub fn mean_depth(&self) -> Result<f64> {
        self.law.mean()
    }

    /// Stored depth at `x`, or a range error.
    pub fn get(&self, x: i64) -> Result<f64> {
        if self.contains(x) {
            Ok(self.taps[(x - self.offset) as usize])
        } else {
            Err(LabError::range(
                "site",
                format!(
                    "{x} outside environment window [{}, {}]",
                    self.lo(),
                    self.hi()
                ),
            ))
        }
    }

    /// Depths on `[lo, hi]` as a slice; the window must be stored.
    pub fn slice(&self, lo: i64, hi: i64) -> Result<&[f64]> {
        if lo > hi || !self.contains(lo) || !self.contains(hi) {
            return Err(LabError::range(
                "window",
                format!("[{lo}, {hi}] not inside [{}, {}]", self.lo(), self.hi()),
            ));
        }
        Ok(&self.taps[(lo - self.offset) as usize..=(hi - self.offset) as usize])
    }

    /// Same landscape on a window covering both the current one and `[lo, hi]`.
    pub fn extended(&self, lo: i64, hi: i64) -> Environment {
        let new_lo = lo.min(self.lo());
        let new_hi = hi.max(self.hi());
        let taps = (new_lo..=new_hi)
            .map(|x| {
                if self.contains(x) {
                    self.taps[(x - self.offset) as usize]
                } else {
                    self.law.site_depth(self.seed, x + self.shift)
                }
            })
            .collect();
        Environment {
            taps,
            offset: new_lo,
            ..*self
        }
    }

    /// The landscape seen from `x`: site `y` of the result is site `y + x`
    /// of `self`.
    pub fn shifted(&self, x: i64) -> Environment {
        Environment {
            offset: self.offset - x,
            shift: self.shift + x,
            taps: self.taps.clone(),
            ..*self
        }
    }

    /// `V(x, n) = sum_{y = x-n}^{x+n} tau_y`.
    pub fn volume(&self, x: i64, n: u64) -> Result<f64> {
        self.volume_query(&VolumeQuery {
            center: x,
            radius: n,
        })
    }

    pub fn volume_query(&self, q: &VolumeQuery) -> Result<f64> {
        let r = i64::try_from(q.radius)
            .map_err(|_| LabError::range("radius", format!("{} too large", q.radius)))?;
        let taps = self.slice(q.center - r, q.center + r).map_err(|_| {
            LabError::range(
                "volume",
                format!(
                    "ball [{}, {}] not inside environment window [{}, {}]",
                    q.center - r,
                    q.center + r,
                    self.lo(),
                    self.hi()
                ),
            )
        })?;
        Ok(taps.iter().copied().collect::<KahanSum>().value())
    }

    /// Sum of depths over the stored sites in `[lo, hi)`.
    pub(crate) fn mass(&self, lo: i64, hi_exclusive: i64) -> Result<f64> {
        if hi_exclusive <= lo {
            return Ok(0.0);
        }
        Ok(self
            .slice(lo, hi_exclusive - 1)?
            .iter()
            .copied()
            .collect::<KahanSum>()
            .value())
    }

    fn header(&self) -> String {
        let law = match self.law {
            TrapLaw::Pareto { alpha } => format!("law=pareto alpha={alpha}"),
            TrapLaw::Constant { depth } => format!("law=constant depth={depth}"),
        };
        format!(
            "# params: {law} seed={} lo={} hi={} shift={}",
            self.seed,
            self.lo(),
            self.hi(),
            self.shift
        )
    }

    /// CSV with a `# params:` sidecar header line and `site,tau` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header())?;
        writeln!(w, "site,tau")?;
        for (i, t) in self.taps.iter().enumerate() {
            writeln!(w, "{},{}", self.offset + i as i64, t)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut law_name = None;
        let mut alpha = None;
        let mut depth = None;
        let mut seed = 0u64;
        let mut shift = 0i64;
        let mut sites = Vec::new();
        let mut taps = Vec::new();
        let mut saw_header = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| LabError::io("<environment csv>", e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some(params) = rest.trim().strip_prefix("params:") else {
                    continue;
                };
                for kv in params.split_whitespace() {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| LabError::Parse(format!("bad header entry `{kv}`")))?;
                    let bad = |_| LabError::Parse(format!("bad header value `{kv}`"));
                    match k {
                        "law" => law_name = Some(v.to_string()),
                        "alpha" => alpha = Some(v.parse::<f64>().map_err(|_| bad(()))?),
                        "depth" => depth = Some(v.parse::<f64>().map_err(|_| bad(()))?),
                        "seed" => seed = v.parse().map_err(|_| bad(()))?,
                        "shift" => shift = v.parse().map_err(|_| bad(()))?,
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_header {
                if line.replace(' ', "") != "site,tau" {
                    return Err(LabError::Parse(format!(
                        "expected `site,tau` header, got `{line}`"
                    )));
                }
                saw_header = true;
                continue;
            }
            let (s, t) = line.split_once(',').ok_or_else(|| {
                LabError::Parse(format!("line {}: expected `site,tau`", lineno + 1))
            })?;
            let s: i64 = s
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("line {}: bad site `{s}`", lineno + 1)))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|_| LabError::Parse(format!("line {}: bad tau `{t}`", lineno + 1)))?;
            if let Some(&prev) = sites.last() {
                if s != prev + 1 {
                    return Err(LabError::Parse(format!(
                        "line {}: sites must be contiguous",
                        lineno + 1
                    )));
                }
            }
            sites.push(s);
            taps.push(t);
        }
        let law = match law_name.as_deref() {
            Some("constant") => TrapLaw::constant(depth.unwrap_or(1.0))?,
            Some("pareto") | None => TrapLaw::pareto(
                alpha.ok_or_else(|| LabError::Parse("header is missing alpha".into()))?,
            )?,
            Some(other) => return Err(LabError::Parse(format!("unknown law `{other}`"))),
        };
        let offset = *sites
            .first()
            .ok_or_else(|| LabError::EmptyData("environment csv has no rows".into()))?;
        let mut env = Environment::from_taps(law, offset, taps, seed)?;
        env.shift = shift;
        Ok(env)
    }
}

impl Scenery for Environment {
    #[inline]
    fn tau(&self, x: i64) -> f64 {
        let i = x - self.offset;
        if i >= 0 && (i as usize) < self.taps.len() {
            self.taps[i as usize]
        } else {
            self.law.site_depth(self.seed, x + self.shift)
        }
    }
}

/// A ball `[center - radius, center + radius]` of lattice sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VolumeQuery {
    pub center: i64,
    pub radius: u64,
}

/// `E[tau_0] = alpha / (alpha - 1)`; infinite for `alpha <= 1`.
pub fn mean_trap(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(LabError::param(
            "alpha",
            format!("must be > 0, got {alpha}"),
        ));
    }
    if alpha <= 1.0 {
        return Err(LabError::InfiniteMean { alpha });
    }
    Ok(alpha / (alpha - 1.0))
}

/// Quantile, truncated mean and truncated variance of the law
/// `F(x) = (1 - c_F x^{-alpha}) v 0` at truncation level `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedStats {
    pub quantile: f64,
    pub mean: f64,
    pub variance: f64,
}

/// `Q(s)`, `mu(s) = int_0^{1-s} Q` and
/// `sigma^2(s) = s Q(1-s)^2 + int_0^{1-s} Q^2 - (s Q(1-s) + mu(s))^2`,
/// all in closed form. Requires `alpha in (0, 2)`.
pub fn truncated_stats(alpha: f64, c_f: f64, s: f64) -> Result<TruncatedStats> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(LabError::param(
            "alpha",
            format!("must lie in (0, 2), got {alpha}"),
        ));
    }
    if !(c_f > 0.0) || !c_f.is_finite() {
        return Err(LabError::param("c_f", format!("must be > 0, got {c_f}")));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(LabError::param("s", format!("must lie in (0, 1), got {s}")));
    }
    let scale = c_f.powf(1.0 / alpha);
    let quantile = scale * (1.0 - s).powf(-1.0 / alpha);
    let mean = if alpha == 1.0 {
        -c_f * s.ln()
    } else {
        scale * alpha / (1.0 - alpha) * (s.powf(1.0 - 1.0 / alpha) - 1.0)
    };
    // s * Q(1 - s) and s * Q(1 - s)^2
    let edge = scale * s.powf(1.0 - 1.0 / alpha);
    let edge_sq = scale * scale * s.powf(1.0 - 2.0 / alpha);
    let second = scale * scale * alpha / (2.0 - alpha) * (s.powf(1.0 - 2.0 / alpha) - 1.0);
    let variance = edge_sq + second - (edge + mean).powi(2);
    Ok(TruncatedStats {
        quantile,
        mean,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cdf_boundary_and_plug_in() {
        let law = TrapLaw::pareto(1.0).unwrap();
        assert_eq!(law.from_uniform(1.0), 1.0);
        assert_eq!(law.from_uniform(0.25), 4.0);
        assert_eq!(TrapLaw::pareto(7.0).unwrap().from_uniform(1.0), 1.0);
    }

    #[test]
    fn sample_rejects_bad_parameters() {
        assert!(matches!(
            Environment::sample(0.0, 0, 1, 1),
            Err(LabError::Parameter { field: "alpha", .. })
        ));
        assert!(matches!(
            Environment::sample(-1.0, 0, 1, 1),
            Err(LabError::Parameter { field: "alpha", .. })
        ));
        assert!(matches!(
            Environment::sample(1.0, 3, 2, 1),
            Err(LabError::Parameter {
                field: "window",
                ..
            })
        ));
    }

    #[test]
    fn sampled_depths_are_at_least_one() {
        for alpha in [0.3, 1.0, 3.0] {
            let env = Environment::sample(alpha, -500, 500, 9).unwrap();
            assert!(env.taps().iter().all(|&t| t >= 1.0));
        }
    }

    #[test]
    fn volume_examples() {
        let ones = Environment::homogeneous(-10, 10).unwrap();
        for n in 0..=10 {
            assert_eq!(ones.volume(0, n).unwrap(), (2 * n + 1) as f64);
        }
        let env = Environment::from_taps(TrapLaw::pareto(2.0).unwrap(), -1, vec![2.0, 3.0, 5.0], 0)
            .unwrap();
        assert_eq!(env.volume(0, 1).unwrap(), 10.0);
        assert_eq!(env.volume(1, 0).unwrap(), 5.0);
        assert!(matches!(env.volume(0, 2), Err(LabError::Range { .. })));
        assert!(matches!(env.volume(1, 1), Err(LabError::Range { .. })));
    }

    #[test]
    fn mean_trap_values() {
        assert_eq!(mean_trap(3.0).unwrap(), 1.5);
        assert_eq!(mean_trap(2.0).unwrap(), 2.0);
        assert!(matches!(mean_trap(1.0), Err(LabError::InfiniteMean { .. })));
        assert!(matches!(mean_trap(0.5), Err(LabError::InfiniteMean { .. })));
    }

    #[test]
    fn mean_trap_matches_tail_integral() {
        // E[tau] = 1 + int_1^inf u^{-alpha} du, integrated with the substitution
        // u = 1/v: int_0^1 v^{alpha - 2} dv, by composite Simpson on a fine grid.
        for alpha in [2.0_f64, 3.0] {
            let n = 20_000;
            let h = 1.0 / n as f64;
            let f = |v: f64| v.powf(alpha - 2.0);
            let mut s = f(0.0) + f(1.0);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            let oracle = 1.0 + s * h / 3.0;
            assert!(
                (mean_trap(alpha).unwrap() - oracle).abs() < 1e-9,
                "alpha {alpha}"
            );
        }
    }

    #[test]
    fn truncated_stats_plug_ins() {
        let st = truncated_stats(0.5, 1.0, 0.75).unwrap();
        assert!((st.quantile - 16.0).abs() < 1e-12);
        let st = truncated_stats(1.0, 2.5, (-1.0f64).exp()).unwrap();
        assert!((st.mean - 2.5).abs() < 1e-12);
        assert!(truncated_stats(1.0, 1.0, 0.0).is_err());
        assert!(truncated_stats(1.0, 1.0, 1.0).is_err());
        assert!(truncated_stats(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn csv_round_trip_preserves_bits() {
        let env = Environment::sample(1.7, -20, 20, 1234).unwrap();
        let mut buf = Vec::new();
        env.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# params: law=pareto alpha=1.7 seed=1234"));
        let back = Environment::read_csv(&buf[..]).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn read_csv_rejects_gaps_and_small_depths() {
        let gap = "# params: law=pareto alpha=2 seed=1\nsite,tau\n0,1.5\n2,1.0\n";
        assert!(Environment::read_csv(gap.as_bytes()).is_err());
        let small = "# params: law=pareto alpha=2 seed=1\nsite,tau\n0,0.5\n";
        assert!(Environment::read_csv(small.as_bytes()).is_err());
    }

    #[test]
    fn extension_and_lookup_agree() {
        let env = Environment::sample(0.8, -5, 5, 77).unwrap();
        let big = env.extended(-50, 60);
        assert_eq!(big.slice(-5, 5).unwrap(), env.taps());
        for x in -50..=60 {
            assert_eq!(env.tau(x), big.tau(x));
        }
    }
}

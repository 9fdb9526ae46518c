//! Config-driven experiment runner.

pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;

use crate::env::{Environment, TrapLaw};
use crate::error::{LabError, Result};
use crate::homog::{self, LcltGrid, Mode};
use crate::kernel;
use crate::numeric::mean_and_se;
use crate::plot::{self, PlotSpec};
use crate::rng::{tags, StreamRng};
use crate::sums;
use crate::table::ResultTable;
use crate::walk::{self, Method};

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const PARAMETER: i32 = 3;
    pub const REGIME: i32 = 4;
    pub const IO: i32 = 5;
    pub const NUMERIC: i32 = 6;
    pub const DATA: i32 = 7;
}

pub fn exit_code(err: &LabError) -> i32 {
    match err {
        LabError::UnknownSubcommand(_) | LabError::UnknownKey { .. } => exit::USAGE,
        LabError::Parameter { .. } | LabError::Range { .. } | LabError::Parse(_) => exit::PARAMETER,
        LabError::Regime { .. } | LabError::InfiniteMean { .. } => exit::REGIME,
        LabError::Io { .. } | LabError::Csv(_) => exit::IO,
        LabError::Domain(_) | LabError::WindowTooSmall { .. } => exit::NUMERIC,
        LabError::MissingColumn(_) | LabError::EmptyData(_) => exit::DATA,
    }
}

#[derive(Debug, Parser)]
#[command(name = "btmlab", version, about = "Bouchaud trap model experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if needed).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override a configuration value, `--set key=value` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Sample a trap landscape.
    SampleEnv(RunArgs),
    /// Fluctuations of volume sums along dyadic blocks.
    Lil(RunArgs),
    /// Tail and median probes of volume sums.
    Tails(RunArgs),
    /// Exact transition rows and on-diagonal traces.
    Kernel(RunArgs),
    /// Green function and exit times of a ball.
    Green(RunArgs),
    /// Walk endpoints from either simulator.
    Walk(RunArgs),
    /// Kolmogorov distances from the Gaussian limit.
    BerryEsseen(RunArgs),
    /// Quadratic variation error moments.
    QvError(RunArgs),
    /// Scenery clock error moments.
    SceneryError(RunArgs),
    /// Sup error of the local limit theorem.
    Lclt(RunArgs),
    /// Cell volume deviations.
    Cells(RunArgs),
    /// Ensemble moments and tightness of the on-diagonal kernel.
    Moments(RunArgs),
    /// Plot columns of a result CSV as SVG.
    Report(RunArgs),
    /// Run the subcommand named by the `command` key of a config file.
    Run(RunArgs),
}

impl CliCommand {
    fn split(&self) -> (Option<&'static str>, &RunArgs) {
        use CliCommand::*;
        match self {
            SampleEnv(a) => (Some("sample-env"), a),
            Lil(a) => (Some("lil"), a),
            Tails(a) => (Some("tails"), a),
            Kernel(a) => (Some("kernel"), a),
            Green(a) => (Some("green"), a),
            Walk(a) => (Some("walk"), a),
            BerryEsseen(a) => (Some("berry-esseen"), a),
            QvError(a) => (Some("qv-error"), a),
            SceneryError(a) => (Some("scenery-error"), a),
            Lclt(a) => (Some("lclt"), a),
            Cells(a) => (Some("cells"), a),
            Moments(a) => (Some("moments"), a),
            Report(a) => (Some("report"), a),
            Run(a) => (None, a),
        }
    }
}

pub const COMMANDS: &[&str] = &[
    "sample-env",
    "lil",
    "tails",
    "kernel",
    "green",
    "walk",
    "berry-esseen",
    "qv-error",
    "scenery-error",
    "lclt",
    "cells",
    "moments",
    "report",
];

const LAW: [(&str, &str); 2] = [("law", "pareto"), ("alpha", "3")];

/// Default settings per subcommand; these are also the accepted keys.
pub fn defaults(command: &str) -> Result<Vec<(&'static str, &'static str)>> {
    let mut d: Vec<(&'static str, &'static str)> = match command {
        "sample-env" => vec![("lo", "-100"), ("hi", "100")],
        "lil" => vec![("n_max", "1000000"), ("c_f", "1")],
        "tails" => vec![
            ("n", "1000"),
            ("lambdas", "2,4,8,16"),
            ("m", "100000"),
            ("median_ns", ""),
            ("median_m", "1000"),
        ],
        "kernel" => vec![
            ("x", "0"),
            ("t", "10"),
            ("tol", "1e-10"),
            ("trace_t", ""),
            ("bounds_n", ""),
            ("holder_t", ""),
            ("holder_radius", "20"),
        ],
        "green" => vec![("x", "0"), ("n", "8"), ("mc_m", "0")],
        "walk" => vec![("t", "100"), ("m", "1000"), ("method", "direct")],
        "berry-esseen" => vec![
            ("mode", "quenched"),
            ("t", "25,100,400,1600"),
            ("m", "10000"),
        ],
        "qv-error" => vec![("mode", "quenched"), ("t", "10,100,1000"), ("m", "10000")],
        "scenery-error" => vec![
            ("mode", "annealed"),
            ("t", "100,1000,10000"),
            ("m", "10000"),
        ],
        "lclt" => vec![
            ("n", "20,40,80"),
            ("K", "2"),
            ("T1", "1"),
            ("T2", "2"),
            ("x_step", "0.1"),
            ("t_step", "0.25"),
            ("theta", ""),
            ("tol", "1e-10"),
        ],
        "cells" => vec![
            ("a", "2"),
            ("eta", "0.75"),
            ("h", "1"),
            ("kappa", "0.6"),
            ("levels", "8,9,10,11,12,13,14"),
        ],
        "moments" => vec![
            ("eps", "1"),
            ("t", "100,1000,10000"),
            ("n_envs", "200"),
            ("tol", "1e-10"),
            ("lambdas", "2,10,50"),
        ],
        "report" => {
            return Ok(vec![
                ("input", ""),
                ("x", "t"),
                ("y", ""),
                ("log_x", "false"),
                ("log_y", "false"),
                ("title", ""),
                ("output", "report.svg"),
            ])
        }
        other => return Err(LabError::UnknownSubcommand(other.to_string())),
    };
    d.extend(LAW);
    Ok(d)
}

fn split_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| LabError::Parse(format!("override `{s}` is not key=value")))?;
    Ok((k.trim().to_string(), v.trim().replace(' ', "")))
}

/// Resolve the subcommand and its validated configuration.
pub fn resolve(named: Option<&str>, args: &RunArgs) -> Result<ExperimentConfig> {
    let mut pairs = match &args.config {
        Some(p) => config::read_pairs(p)?,
        None => Vec::new(),
    };
    for o in &args.overrides {
        pairs.push(split_override(o)?);
    }
    let command = match named {
        Some(c) => c.to_string(),
        None => pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "command")
            .map(|(_, v)| v.clone())
            .ok_or_else(|| {
                LabError::param("command", "`run` needs a `command` key in the config")
            })?,
    };
    ExperimentConfig::build(&command, &defaults(&command)?, &pairs)
}

fn law(cfg: &ExperimentConfig) -> Result<TrapLaw> {
    match cfg.str("law")? {
        "pareto" => TrapLaw::pareto(cfg.f64("alpha")?),
        "constant" => TrapLaw::constant(1.0),
        other => Err(LabError::param(
            "law",
            format!("expected pareto or constant, got `{other}`"),
        )),
    }
}

fn stamp(mut t: ResultTable, cfg: &ExperimentConfig) -> ResultTable {
    t.set_param("command", cfg.command());
    for (k, v) in cfg.entries() {
        if !v.is_empty() {
            t.set_param(k.to_string(), v);
        } else if t.param(k).is_none() {
            t.set_param(k.to_string(), "-");
        }
    }
    t
}

struct Output<'a> {
    dir: &'a Path,
    cfg: &'a ExperimentConfig,
    written: Vec<PathBuf>,
}

impl Output<'_> {
    fn table(&mut self, name: &str, t: ResultTable, plot: Option<PlotSpec>) -> Result<()> {
        let t = stamp(t, self.cfg);
        let path = self.dir.join(format!("{name}.csv"));
        t.write_file(&path)?;
        self.written.push(path);
        if let (Some(spec), true) = (plot, self.cfg.bool("plot")?) {
            let svg = plot::render_svg(&t, &spec)?;
            let path = self.dir.join(format!("{name}.svg"));
            std::fs::write(&path, svg).map_err(|e| LabError::io(&path, e))?;
            self.written.push(path);
        }
        Ok(())
    }
}

fn loglog(x: &str, ys: &[&str], title: &str) -> Option<PlotSpec> {
    Some(PlotSpec {
        x: x.into(),
        ys: ys.iter().map(|s| s.to_string()).collect(),
        log_x: true,
        log_y: true,
        title: title.into(),
    })
}

/// Run one configured experiment, writing its artifacts into `dir`.
pub fn execute(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut out = Output {
        dir,
        cfg,
        written: Vec::new(),
    };
    let seed = cfg.u64("seed")?;
    match cfg.command() {
        "sample-env" => {
            let env = Environment::from_law(law(cfg)?, cfg.i64("lo")?, cfg.i64("hi")?, seed)?;
            let path = dir.join("env.csv");
            let mut f = std::fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
            env.write_csv(&mut f).map_err(|e| LabError::io(&path, e))?;
            out.written.push(path);
        }
        "lil" => {
            let law = law(cfg)?;
            let mut t = sums::fluctuation_probe(&law, cfg.u64("n_max")?, seed)?;
            if let Some(alpha) = law.alpha().filter(|a| *a <= 2.0) {
                let c = sums::lil_constants(alpha, cfg.f64("c_f")?)?;
                t.set_param("liminf_const", c.liminf_const);
                t.set_param("k_alpha", c.k_alpha);
            }
            out.table("lil", t, None)?;
        }
        "tails" => {
            let alpha = cfg.f64("alpha")?;
            let r = sums::tail_probe(
                alpha,
                cfg.u64("n")?,
                &cfg.f64_list("lambdas")?,
                cfg.usize("m")?,
                seed,
            )?;
            out.table(
                "tails",
                r.to_table(seed),
                loglog("lambda", &["upper"], "upper tail"),
            )?;
            let ns = cfg.u64_list("median_ns")?;
            if !ns.is_empty() {
                let m = cfg.usize("median_m")?;
                let rows = sums::median_probe(alpha, &ns, m, seed)?;
                out.table(
                    "median",
                    sums::median_table(alpha, m, seed, &rows),
                    loglog("n", &["median"], "median"),
                )?;
            }
        }
        "kernel" => run_kernel(cfg, &mut out, seed)?,
        "green" => run_green(cfg, &mut out, seed)?,
        "walk" => run_walk(cfg, &mut out, seed)?,
        "berry-esseen" => {
            let mode = Mode::parse(cfg.str("mode")?)?;
            let r =
                homog::berry_esseen(law(cfg)?, mode, &cfg.f64_list("t")?, cfg.usize("m")?, seed)?;
            out.table(
                "berry_esseen",
                r.to_table(),
                loglog("t", &["D", "noise_floor"], "Kolmogorov distance"),
            )?;
        }
        "qv-error" => {
            let mode = Mode::parse(cfg.str("mode")?)?;
            let r = homog::qv_error(law(cfg)?, mode, &cfg.f64_list("t")?, cfg.usize("m")?, seed)?;
            out.table(
                "qv_error",
                r.to_table("qv_error"),
                loglog("t", &["estimate"], "quadratic variation error"),
            )?;
        }
        "scenery-error" => {
            let mode = Mode::parse(cfg.str("mode")?)?;
            let r =
                homog::scenery_error(law(cfg)?, mode, &cfg.f64_list("t")?, cfg.usize("m")?, seed)?;
            out.table(
                "scenery_error",
                r.to_table("scenery_error"),
                loglog("t", &["estimate"], "scenery clock error"),
            )?;
        }
        "lclt" => {
            let alpha = cfg.f64("alpha")?;
            let env = Environment::from_law(law(cfg)?, 0, 0, seed)?;
            let grid = LcltGrid {
                k: cfg.f64("K")?,
                t1: cfg.f64("T1")?,
                t2: cfg.f64("T2")?,
                x_step: cfg.f64("x_step")?,
                t_step: cfg.f64("t_step")?,
            };
            let theta = if cfg.is_set("theta") {
                cfg.f64("theta")?
            } else {
                homog::default_theta(alpha)
            };
            let r = homog::lclt_error(
                &env,
                alpha,
                &cfg.u64_list("n")?,
                grid,
                theta,
                cfg.f64("tol")?,
            )?;
            out.table(
                "lclt",
                r.to_table(),
                loglog("n", &["error", "scaled_error"], "local limit error"),
            )?;
        }
        "cells" => {
            let env = Environment::from_law(law(cfg)?, 0, 0, seed)?;
            let levels: Vec<u32> = cfg
                .u64_list("levels")?
                .into_iter()
                .map(|l| u32::try_from(l).map_err(|_| LabError::param("levels", "level too large")))
                .collect::<Result<_>>()?;
            let t = homog::cell_volume_scan(
                &env,
                cfg.f64("a")?,
                cfg.f64("eta")?,
                cfg.f64("h")?,
                cfg.f64("kappa")?,
                &levels,
            )?;
            out.table(
                "cells",
                t,
                Some(PlotSpec {
                    x: "N".into(),
                    ys: vec!["sup_deviation".into()],
                    log_y: true,
                    title: "cell volume deviation".into(),
                    ..Default::default()
                }),
            )?;
        }
        "moments" => {
            let ens = homog::ensemble_ratios(
                law(cfg)?,
                cfg.f64("alpha")?,
                &cfg.f64_list("t")?,
                cfg.usize("n_envs")?,
                seed,
                cfg.f64("tol")?,
            )?;
            out.table(
                "moments",
                homog::annealed_moment(&ens, cfg.f64("eps")?)?,
                loglog("t", &["moment_ratio"], "annealed moment ratio"),
            )?;
            out.table(
                "tightness",
                homog::tightness_probe(&ens, &cfg.f64_list("lambdas")?)?,
                None,
            )?;
        }
        "report" => {
            if !cfg.is_set("input") {
                return Err(LabError::param("input", "report needs an input CSV"));
            }
            let ys: Vec<String> = cfg
                .str("y")?
                .split(',')
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            let spec = PlotSpec {
                x: cfg.str("x")?.to_string(),
                ys,
                log_x: cfg.bool("log_x")?,
                log_y: cfg.bool("log_y")?,
                title: cfg.str("title")?.to_string(),
            };
            let path = dir.join(cfg.str("output")?);
            plot::report(Path::new(cfg.str("input")?), &spec, &path)?;
            out.written.push(path);
        }
        other => return Err(LabError::UnknownSubcommand(other.to_string())),
    }
    Ok(out.written)
}

fn run_kernel(cfg: &ExperimentConfig, out: &mut Output, seed: u64) -> Result<()> {
    let law = law(cfg)?;
    let (x, t, tol) = (cfg.i64("x")?, cfg.f64("t")?, cfg.f64("tol")?);
    let env = Environment::from_law(law, x, x, seed)?;
    let (_, gen) = kernel::generator_for(&env, x, t, tol)?;
    let row = kernel::transition_row(&gen, x, t, tol)?;
    out.table("kernel", row.to_table(&gen), None)?;

    let trace_t = cfg.f64_list("trace_t")?;
    if !trace_t.is_empty() {
        let alpha = law.alpha().unwrap_or(cfg.f64("alpha")?);
        let env0 = Environment::from_law(law, 0, 0, seed)?;
        let tr = kernel::ondiagonal_trace(&env0, alpha, &trace_t, tol)?;
        out.table("trace", tr, loglog("t", &["p"], "on-diagonal heat kernel"))?;
    }
    let ns = cfg.u64_list("bounds_n")?;
    if !ns.is_empty() {
        let mut t = ResultTable::new(&[
            "n",
            "upper_lhs",
            "upper_rhs",
            "upper_slack",
            "lower_lhs",
            "lower_rhs",
            "lower_slack",
            "holds",
        ]);
        for n in ns {
            let r = kernel::check_volume_bounds(&env, x, n, tol)?;
            t.push_row(vec![
                n as f64,
                r.upper.lhs,
                r.upper.rhs,
                r.upper.slack,
                r.lower.lhs,
                r.lower.rhs,
                r.lower.slack,
                r.holds() as u8 as f64,
            ]);
        }
        out.table("volume_bounds", t, None)?;
    }
    let holder_t = cfg.f64_list("holder_t")?;
    if !holder_t.is_empty() {
        let rad = cfg.i64("holder_radius")?;
        let mut t = ResultTable::new(&["t", "constant", "x", "y"]);
        for ht in holder_t {
            let h = kernel::check_holder(&env, ht, -rad..=rad, tol)?;
            t.push_row(vec![ht, h.constant, h.argmax.0 as f64, h.argmax.1 as f64]);
        }
        out.table("holder", t, None)?;
    }
    Ok(())
}

fn run_green(cfg: &ExperimentConfig, out: &mut Output, seed: u64) -> Result<()> {
    let (x, n) = (cfg.i64("x")?, cfg.i64("n")?);
    if n <= 0 {
        return Err(LabError::param(
            "n",
            format!("ball radius must be >= 1, got {n}"),
        ));
    }
    let env = Environment::from_law(law(cfg)?, x - n, x + n, seed)?;
    let exit = kernel::exit_time_profile(&env, x, n)?;
    let mut t = ResultTable::new(&["y", "exit_time", "green_from_center", "green_closed_form"])
        .with_param("resistance", kernel::effective_resistance(n as u64));
    for (i, e) in exit.iter().enumerate() {
        let y = x - n + 1 + i as i64;
        t.push_row(vec![
            y as f64,
            *e,
            kernel::green_function(&env, x, n, x, y)?,
            kernel::green_closed_form(x, n, x, y),
        ]);
    }
    let m = cfg.usize("mc_m")?;
    if m > 0 {
        let times = walk::replicate(m, |r| {
            let mut rng = StreamRng::new(seed, tags::EXIT_TIME, r);
            walk::exit_time(&env, x, n, x, &mut rng)
        });
        let (mean, se) = mean_and_se(&times);
        t.set_param("mc_exit_mean", mean);
        t.set_param("mc_exit_se", se);
    }
    out.table("green", t, None)
}

fn run_walk(cfg: &ExperimentConfig, out: &mut Output, seed: u64) -> Result<()> {
    let law = law(cfg)?;
    let (t, m) = (cfg.f64("t")?, cfg.usize("m")?);
    if !(t >= 0.0) || !t.is_finite() {
        return Err(LabError::param(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    if m == 0 {
        return Err(LabError::param("m", "need at least one walk"));
    }
    let h = kernel::safe_halfwidth(t, 1e-12).min(1 << 20);
    let env = Environment::from_law(law, -h, h, seed)?;
    let methods: Vec<Method> = match cfg.str("method")? {
        "direct" => vec![Method::Direct],
        "timechange" => vec![Method::TimeChange],
        "both" => vec![Method::Direct, Method::TimeChange],
        other => {
            return Err(LabError::param(
                "method",
                format!("expected direct, timechange or both, got `{other}`"),
            ))
        }
    };
    let mut cols = vec!["replicate".to_string()];
    let mut samples = Vec::new();
    for &method in &methods {
        let tag = method.stream_tag();
        let s = walk::replicate(m, |r| {
            let mut rng = StreamRng::new(seed, tag, r);
            walk::observe_at_times(method, &env, 0, &[t], &mut rng)[0]
        });
        cols.push(format!("{}_position", method.label()));
        cols.push(format!("{}_jumps", method.label()));
        samples.push(s);
    }
    let mut table = ResultTable::new(&cols);
    if samples.len() == 2 {
        let sorted = |s: &[walk::WalkSample]| {
            let mut v: Vec<f64> = s.iter().map(|w| w.position as f64).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let ks = walk::ks_two_sample(&sorted(&samples[0]), &sorted(&samples[1]))?;
        table.set_param("ks", ks);
        table.set_param("ks_critical_1e-3", walk::ks_critical_value(m, m, 1e-3));
    }
    for r in 0..m {
        let mut row = vec![r as f64];
        for s in &samples {
            row.push(s[r].position as f64);
            row.push(s[r].jumps as f64);
        }
        table.push_row(row);
    }
    out.table("walk", table, None)
}

/// Parse arguments, run, and return the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    let (named, args) = cli.command.split();
    match run(named, args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Resolve, then execute on a pool of `--threads` workers.
pub fn run(named: Option<&str>, args: &RunArgs) -> Result<Vec<PathBuf>> {
    let cfg = resolve(named, args)?;
    let threads = match args.threads {
        Some(0) => return Err(LabError::param("threads", "must be >= 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::param("threads", e.to_string()))?;
    pool.install(|| execute(&cfg, &args.out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_has_defaults() {
        for c in COMMANDS {
            assert!(defaults(c).is_ok(), "{c}");
        }
        assert!(matches!(
            defaults("nope"),
            Err(LabError::UnknownSubcommand(_))
        ));
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&LabError::UnknownSubcommand("x".into())),
            exit_code(&LabError::param("a", "b")),
            exit_code(&LabError::Regime {
                alpha: 2.0,
                requirement: "",
            }),
            exit_code(&LabError::io("/x", std::io::Error::other("e"))),
            exit_code(&LabError::Domain("d".into())),
            exit_code(&LabError::MissingColumn("D".into())),
        ];
        let mut sorted = codes.to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), codes.len());
        assert!(codes.iter().all(|&c| c != 0));
    }
}

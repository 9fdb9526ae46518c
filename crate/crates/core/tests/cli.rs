use std::path::Path;
use std::process::{Command, Output};

use btmlab::table::ResultTable;

fn btmlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btmlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("BTMLAB_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(btmlab(&["frobnicate"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("x.conf"), "command = frobnicate\n").unwrap();
    let o = btmlab(&["run", "--config", "x.conf"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frobnicate"));
}

#[test]
fn unknown_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let o = btmlab(&["kernel", "--set", "tt=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`tt`"), "{}", stderr(&o));
}

#[test]
fn berry_esseen_at_alpha_two_is_a_regime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = btmlab(
        &["berry-esseen", "--set", "alpha=2", "--set", "m=100"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
    assert!(!dir.path().join("berry_esseen.csv").exists());
}

#[test]
fn bad_values_name_their_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = btmlab(&["walk", "--set", "m=lots"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`m`"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let o = btmlab(&["sample-env", "--out", "blocker/sub"], dir.path());
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn artifacts_carry_their_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = btmlab(
        &[
            "kernel",
            "--set",
            "seed=5",
            "--set",
            "t=20",
            "--set",
            "trace_t=10,100",
            "--set",
            "plot=true",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["kernel.csv", "trace.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("# params:"));
        let t = ResultTable::parse(text.as_bytes()).unwrap();
        assert_eq!(t.param("seed"), Some("5"));
        assert_eq!(t.param("t"), Some("20"));
        assert_eq!(t.param("trace_t"), Some("10,100"));
    }
    assert!(std::fs::read_to_string(dir.path().join("trace.svg"))
        .unwrap()
        .starts_with("<svg"));
}

#[test]
fn seed_falls_back_to_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_btmlab"))
            .args([
                "sample-env",
                "--out",
                out,
                "--set",
                "lo=-5",
                "--set",
                "hi=5",
            ])
            .current_dir(dir.path())
            .env("BTMLAB_SEED", seed)
            .output()
            .unwrap();
        assert!(o.status.success());
        std::fs::read(dir.path().join(out).join("env.csv")).unwrap()
    };
    assert_eq!(run("9", "a"), run("9", "b"));
    assert_ne!(run("9", "a"), run("10", "c"));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.conf"),
        "command = green\nn = 4\nseed = 2\n",
    )
    .unwrap();
    let o = btmlab(
        &[
            "run",
            "--config",
            "g.conf",
            "--set",
            "n=5",
            "--threads",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = ResultTable::read_file(&dir.path().join("green.csv")).unwrap();
    assert_eq!(t.rows().len(), 9);
    assert_eq!(t.param("resistance"), Some("2.5"));
}

#[test]
fn report_plots_existing_columns_only() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("d.csv"),
        "# params: m=1\nt,D\n25,0.1\n100,0.05\n",
    )
    .unwrap();
    let ok = btmlab(
        &[
            "report",
            "--set",
            "input=d.csv",
            "--set",
            "y=D",
            "--set",
            "log_x=true",
            "--set",
            "log_y=true",
        ],
        dir.path(),
    );
    assert!(ok.status.success(), "{}", stderr(&ok));
    assert!(dir.path().join("report.svg").exists());

    let missing = btmlab(
        &[
            "report",
            "--set",
            "input=d.csv",
            "--set",
            "y=E",
            "--set",
            "output=e.svg",
        ],
        dir.path(),
    );
    assert_eq!(missing.status.code(), Some(7));
    assert!(stderr(&missing).contains('E'));
    assert!(!dir.path().join("e.svg").exists());

    std::fs::write(dir.path().join("empty.csv"), "# params: m=1\nt,D\n").unwrap();
    let empty = btmlab(
        &[
            "report",
            "--set",
            "input=empty.csv",
            "--set",
            "y=D",
            "--set",
            "output=f.svg",
        ],
        dir.path(),
    );
    assert_eq!(empty.status.code(), Some(7));
    assert!(!dir.path().join("f.svg").exists());
}

#[test]
fn walk_both_records_the_two_sample_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let o = btmlab(
        &[
            "walk",
            "--set",
            "method=both",
            "--set",
            "m=500",
            "--set",
            "t=50",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let t = ResultTable::read_file(&dir.path().join("walk.csv")).unwrap();
    let ks: f64 = t.param("ks").unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&ks));
    assert_eq!(t.columns().len(), 5);
}

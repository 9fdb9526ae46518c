use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use btmlab_ffi::*;

fn env(alpha: f64, lo: i64, hi: i64, seed: u64) -> *mut BtmEnvironment {
    let mut e = ptr::null_mut();
    assert_eq!(
        unsafe { btm_env_sample(alpha, lo, hi, seed, &mut e) },
        BtmStatus::Ok
    );
    e
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        btm_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn environment_lifecycle_and_queries() {
    let e = env(1.5, -10, 10, 3);
    let (mut tau, mut vol) = (0.0, 0.0);
    unsafe {
        assert_eq!(btm_env_tau(e, 0, &mut tau), BtmStatus::Ok);
        assert!(tau >= 1.0);
        assert_eq!(btm_env_volume(e, 0, 0, &mut vol), BtmStatus::Ok);
        assert_eq!(vol, tau);
        assert_eq!(btm_env_tau(e, 11, &mut tau), BtmStatus::Parameter);
        assert!(last_error().contains("11"), "{}", last_error());
        btm_env_free(e);
        btm_env_free(ptr::null_mut());
    }
}

#[test]
fn errors_map_to_status_codes() {
    let mut e = ptr::null_mut();
    unsafe {
        assert_eq!(btm_env_sample(-1.0, 0, 5, 1, &mut e), BtmStatus::Parameter);
        assert!(last_error().contains("alpha"));
        assert_eq!(
            btm_env_sample(1.0, 0, 5, 1, ptr::null_mut()),
            BtmStatus::NullPointer
        );
        assert!(last_error().contains("out"));
        let mut x = 0.0;
        assert_eq!(btm_env_tau(ptr::null(), 0, &mut x), BtmStatus::NullPointer);
    }
}

#[test]
fn transition_row_reports_required_length() {
    let e = env(3.0, -5, 5, 4);
    let (mut lo, mut len) = (0i64, 0usize);
    unsafe {
        assert_eq!(
            btm_transition_row(e, 0, 10.0, 1e-10, ptr::null_mut(), 0, &mut lo, &mut len),
            BtmStatus::BufferTooSmall
        );
        let mut probs = vec![0.0; len];
        assert_eq!(
            btm_transition_row(
                e,
                0,
                10.0,
                1e-10,
                probs.as_mut_ptr(),
                len,
                &mut lo,
                &mut len
            ),
            BtmStatus::Ok
        );
        assert!(lo < 0);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let mut p = 0.0;
        assert_eq!(btm_heat_kernel(e, 0, 0, 10.0, 1e-10, &mut p), BtmStatus::Ok);
        let mut tau = 0.0;
        btm_env_tau(e, 0, &mut tau);
        assert!((p - probs[(-lo) as usize] / tau).abs() < 1e-12);
        btm_env_free(e);
    }
}

#[test]
fn green_and_exit_time_oracles() {
    let mut e = ptr::null_mut();
    let (mut g, mut exit) = (0.0, 0.0);
    unsafe {
        assert_eq!(btm_env_homogeneous(-2, 2, &mut e), BtmStatus::Ok);
        assert_eq!(btm_green_function(e, 0, 2, 0, 0, &mut g), BtmStatus::Ok);
        assert_eq!(btm_expected_exit_time(e, 0, 2, 0, &mut exit), BtmStatus::Ok);
        btm_env_free(e);
    }
    assert!((g - 2.0).abs() < 1e-12);
    assert!((exit - 4.0).abs() < 1e-12);
}

#[test]
fn walks_are_reproducible_and_roughly_gaussian() {
    let e = env(3.0, -200, 200, 5);
    let m = 4000;
    let (mut a, mut b) = (vec![0i64; m], vec![0i64; m]);
    unsafe {
        assert_eq!(
            btm_walk_endpoints(e, BtmMethod::Direct, 400.0, m, 9, a.as_mut_ptr()),
            BtmStatus::Ok
        );
        assert_eq!(
            btm_walk_endpoints(e, BtmMethod::Direct, 400.0, m, 9, b.as_mut_ptr()),
            BtmStatus::Ok
        );
        btm_env_free(e);
    }
    assert_eq!(a, b);
    let sd = (400.0 * 2.0 / 3.0f64).sqrt();
    let z: Vec<f64> = a.iter().map(|&x| x as f64 / sd).collect();
    let mut d = 0.0;
    assert_eq!(
        unsafe { btm_ks_normal(z.as_ptr(), z.len(), &mut d) },
        BtmStatus::Ok
    );
    assert!(d < 0.1, "{d}");
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(btm_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include").join("btmlab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "btm_env_sample",
        "btm_transition_row",
        "btm_walk_endpoints",
        "btm_last_error_message",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let lib = target_profile_dir().join("libbtmlab_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "btmlab.h"
int main(void) {
    BtmEnvironment *env = NULL;
    double g = 0.0;
    if (btm_env_homogeneous(-3, 3, &env) != BTM_STATUS_OK) return 1;
    if (btm_green_function(env, 0, 3, 0, 0, &g) != BTM_STATUS_OK) return 2;
    btm_env_free(env);
    if (btm_env_sample(-1.0, 0, 1, 1, &env) != BTM_STATUS_PARAMETER) return 3;
    char msg[128];
    btm_last_error_message(msg, sizeof msg);
    printf("%.12f %s\n", g, msg);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("3.000000000000 "), "{stdout}");
    assert!(stdout.contains("alpha"));
}

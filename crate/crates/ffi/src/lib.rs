//! C ABI bindings.
//!
//! Every function returns a [`BtmStatus`]; results go through out-pointers.
//! On failure, [`btm_last_error_message`] describes the most recent error on
//! the calling thread. Environments are opaque handles created by
//! `btm_env_*` constructors and released with [`btm_env_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use btmlab::env::Environment;
use btmlab::kernel;
use btmlab::walk::{self, Method};
use btmlab::LabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BtmStatus {
    Ok = 0,
    NullPointer = 1,
    BufferTooSmall = 2,
    Parameter = 3,
    Regime = 4,
    Io = 5,
    Numeric = 6,
    Data = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BtmMethod {
    Direct = 0,
    TimeChange = 1,
}

/// Opaque trap landscape.
pub struct BtmEnvironment(Environment);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &LabError) -> BtmStatus {
    match err {
        LabError::Parameter { .. }
        | LabError::Range { .. }
        | LabError::Parse(_)
        | LabError::UnknownKey { .. }
        | LabError::UnknownSubcommand(_) => BtmStatus::Parameter,
        LabError::Regime { .. } | LabError::InfiniteMean { .. } => BtmStatus::Regime,
        LabError::Io { .. } | LabError::Csv(_) => BtmStatus::Io,
        LabError::Domain(_) | LabError::WindowTooSmall { .. } => BtmStatus::Numeric,
        LabError::MissingColumn(_) | LabError::EmptyData(_) => BtmStatus::Data,
    }
}

enum Fail {
    Null(&'static str),
    Small(usize),
    Lab(LabError),
}

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail::Lab(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BtmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BtmStatus::Ok,
        Ok(Err(Fail::Null(name))) => {
            set_error(format!("null pointer passed as `{name}`"));
            BtmStatus::NullPointer
        }
        Ok(Err(Fail::Small(need))) => {
            set_error(format!("output buffer too small, need {need} entries"));
            BtmStatus::BufferTooSmall
        }
        Ok(Err(Fail::Lab(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".to_string());
            set_error(msg);
            BtmStatus::Panic
        }
    }
}

unsafe fn env_ref<'a>(env: *const BtmEnvironment) -> Result<&'a Environment, Fail> {
    env.as_ref().map(|e| &e.0).ok_or(Fail::Null("env"))
}

unsafe fn write<T>(out: *mut T, name: &'static str, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(name));
    }
    out.write(value);
    Ok(())
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length including the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn btm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn btm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Sample Pareto(`alpha`) depths on `[lo, hi]`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_env_sample(
    alpha: f64,
    lo: i64,
    hi: i64,
    seed: u64,
    out: *mut *mut BtmEnvironment,
) -> BtmStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let env = Environment::sample(alpha, lo, hi, seed)?;
        out.write(Box::into_raw(Box::new(BtmEnvironment(env))));
        Ok(())
    })
}

/// Unit depths on `[lo, hi]`.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_env_homogeneous(
    lo: i64,
    hi: i64,
    out: *mut *mut BtmEnvironment,
) -> BtmStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let env = Environment::homogeneous(lo, hi)?;
        out.write(Box::into_raw(Box::new(BtmEnvironment(env))));
        Ok(())
    })
}

/// Release an environment. Null is ignored.
///
/// # Safety
/// `env` must come from a `btm_env_*` constructor and not be used again.
#[no_mangle]
pub unsafe extern "C" fn btm_env_free(env: *mut BtmEnvironment) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Depth at site `x` (must lie in the sampled window).
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_env_tau(
    env: *const BtmEnvironment,
    x: i64,
    out: *mut f64,
) -> BtmStatus {
    guard(|| write(out, "out", env_ref(env)?.get(x)?))
}

/// Ball volume `sum_{|y - x| <= n} tau_y`.
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_env_volume(
    env: *const BtmEnvironment,
    x: i64,
    n: u64,
    out: *mut f64,
) -> BtmStatus {
    guard(|| write(out, "out", env_ref(env)?.volume(x, n)?))
}

/// Transition probabilities `P_x(X_t = y)` for `y = *out_lo, ...,
/// *out_lo + *out_len - 1`. If `cap` is too small, `*out_len` receives the
/// required length and `BTM_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `env` must be a live handle, `probs` valid for `cap` writes, and
/// `out_lo`, `out_len` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn btm_transition_row(
    env: *const BtmEnvironment,
    x: i64,
    t: f64,
    tol: f64,
    probs: *mut f64,
    cap: usize,
    out_lo: *mut i64,
    out_len: *mut usize,
) -> BtmStatus {
    guard(|| {
        let env = env_ref(env)?;
        let (_, gen) = kernel::generator_for(env, x, t, tol)?;
        let row = kernel::transition_row(&gen, x, t, tol)?;
        write(out_len, "out_len", row.probs.len())?;
        write(out_lo, "out_lo", row.lo)?;
        if row.probs.len() > cap {
            return Err(Fail::Small(row.probs.len()));
        }
        if probs.is_null() {
            return Err(Fail::Null("probs"));
        }
        std::ptr::copy_nonoverlapping(row.probs.as_ptr(), probs, row.probs.len());
        Ok(())
    })
}

/// Heat kernel `P_x(X_t = y) / tau_y`.
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_heat_kernel(
    env: *const BtmEnvironment,
    x: i64,
    y: i64,
    t: f64,
    tol: f64,
    out: *mut f64,
) -> BtmStatus {
    guard(|| {
        let env = env_ref(env)?;
        let (_, gen) = kernel::generator_for(&env.extended(y, y), x, t, tol)?;
        write(out, "out", kernel::heat_kernel(&gen, x, y, t, tol)?)
    })
}

/// Green function of the ball of radius `n` around `x`, killed on exit.
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_green_function(
    env: *const BtmEnvironment,
    x: i64,
    n: i64,
    y: i64,
    z: i64,
    out: *mut f64,
) -> BtmStatus {
    guard(|| {
        write(
            out,
            "out",
            kernel::green_function(env_ref(env)?, x, n, y, z)?,
        )
    })
}

/// Expected exit time from the ball of radius `n` around `x`, started at `y`.
///
/// # Safety
/// `env` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_expected_exit_time(
    env: *const BtmEnvironment,
    x: i64,
    n: i64,
    y: i64,
    out: *mut f64,
) -> BtmStatus {
    guard(|| {
        write(
            out,
            "out",
            kernel::expected_exit_time(env_ref(env)?, x, n, y)?,
        )
    })
}

/// Positions at time `t` of `m` independent walks from 0. Sites outside the
/// sampled window draw their depths from the same per-site stream.
///
/// # Safety
/// `env` must be a live handle and `out` valid for `m` writes.
#[no_mangle]
pub unsafe extern "C" fn btm_walk_endpoints(
    env: *const BtmEnvironment,
    method: BtmMethod,
    t: f64,
    m: usize,
    seed: u64,
    out: *mut i64,
) -> BtmStatus {
    guard(|| {
        let env = env_ref(env)?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(LabError::Parameter {
                field: "t",
                reason: format!("must be finite and >= 0, got {t}"),
            }
            .into());
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let method = match method {
            BtmMethod::Direct => Method::Direct,
            BtmMethod::TimeChange => Method::TimeChange,
        };
        let xs = walk::sample_endpoints(method, env, t, m, seed);
        std::ptr::copy_nonoverlapping(xs.as_ptr(), out, m);
        Ok(())
    })
}

/// Kolmogorov distance between the empirical law of `samples` and the
/// standard normal.
///
/// # Safety
/// `samples` must be valid for `n` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn btm_ks_normal(samples: *const f64, n: usize, out: *mut f64) -> BtmStatus {
    guard(|| {
        if samples.is_null() {
            return Err(Fail::Null("samples"));
        }
        let mut v = std::slice::from_raw_parts(samples, n).to_vec();
        v.sort_by(f64::total_cmp);
        write(
            out,
            "out",
            walk::kolmogorov_distance(&v, walk::std_normal_cdf)?,
        )
    })
}

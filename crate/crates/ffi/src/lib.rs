//! C ABI over the streaming delay estimator.
//!
//! All functions return an [`SdStatus`]; on failure a human-readable message
//! is kept per thread and can be fetched with [`sd_last_error_message`].
//! Estimator handles are opaque and must be released with
//! [`sd_estimator_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use subdelay::{Criterion, Error, EstimatorConfig, EstimatorState, Sample};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    NonFinite = 4,
    InsufficientData = 5,
    /// Input not persistently exciting; use a richer input or more data.
    Excitation = 6,
    /// Numerical breakdown; bootstrap a new estimator.
    Breakdown = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Ratio criterion; the parameter is the regularizer (<= 0 uses the configured epsilon).
pub const SD_CRITERION_RATIO: u32 = 0;
/// Threshold criterion; the parameter is the threshold.
pub const SD_CRITERION_THRESHOLD: u32 = 1;

/// Estimator settings.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdConfig {
    /// Number of inputs.
    pub m: usize,
    /// Number of outputs.
    pub l: usize,
    /// Hankel columns used by the bootstrap.
    pub j: usize,
    /// Past horizon.
    pub i: usize,
    /// Future horizon.
    pub h: usize,
    /// Forgetting factor in (0, 1].
    pub gamma: f64,
    /// Ratio-criterion regularizer.
    pub epsilon: f64,
    /// Largest delay reported.
    pub d_max: usize,
    /// Relative pseudoinverse cutoff; negative selects the default.
    pub rank_tol: f64,
}

/// Opaque estimator handle.
pub struct SdEstimator {
    state: EstimatorState,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> SdStatus {
    match e {
        Error::Range(_) | Error::Config(_) | Error::Unstable(_) | Error::NonMaximalTaps { .. } => SdStatus::InvalidArgument,
        Error::Dimension { .. } => SdStatus::Dimension,
        Error::NonFinite(_) => SdStatus::NonFinite,
        Error::InsufficientData { .. } => SdStatus::InsufficientData,
        Error::Excitation { .. } | Error::SingularInput { .. } => SdStatus::Excitation,
        Error::Breakdown(_) => SdStatus::Breakdown,
        Error::Parse { .. } | Error::Io(_) => SdStatus::Internal,
    }
}

fn fail(status: SdStatus, msg: impl Into<String>) -> SdStatus {
    set_last_error(msg);
    status
}

fn from_error(e: Error) -> SdStatus {
    fail(status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> SdStatus) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => {
            if s == SdStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            s
        }
        Err(_) => fail(SdStatus::Internal, "internal panic"),
    }
}

impl From<&SdConfig> for EstimatorConfig {
    fn from(c: &SdConfig) -> Self {
        EstimatorConfig {
            m: c.m,
            l: c.l,
            j: c.j,
            i: c.i,
            h: c.h,
            gamma: c.gamma,
            epsilon: c.epsilon,
            d_max: c.d_max,
            rank_tol: (c.rank_tol >= 0.0).then_some(c.rank_tol),
        }
    }
}

/// Default settings for a single-input single-output system.
#[no_mangle]
pub extern "C" fn sd_config_default() -> SdConfig {
    let d = EstimatorConfig::default();
    SdConfig {
        m: d.m,
        l: d.l,
        j: d.j,
        i: d.i,
        h: d.h,
        gamma: d.gamma,
        epsilon: d.epsilon,
        d_max: d.d_max,
        rank_tol: -1.0,
    }
}

/// Bootstraps an estimator from `n` samples. `u` holds `n * m` values and `y`
/// holds `n * l` values, both sample-major. On success `*out` receives a new
/// handle.
///
/// # Safety
/// `config` must point to a valid `SdConfig`, `u` and `y` to arrays of the
/// stated lengths, and `out` to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_bootstrap(
    config: *const SdConfig,
    u: *const f64,
    y: *const f64,
    n: usize,
    out: *mut *mut SdEstimator,
) -> SdStatus {
    guard(|| {
        if config.is_null() || u.is_null() || y.is_null() || out.is_null() {
            return fail(SdStatus::NullPointer, "null argument to sd_estimator_bootstrap");
        }
        let cfg = EstimatorConfig::from(&*config);
        let (Some(nu), Some(ny)) = (n.checked_mul(cfg.m), n.checked_mul(cfg.l)) else {
            return fail(SdStatus::InvalidArgument, "sample count overflows");
        };
        let us = std::slice::from_raw_parts(u, nu);
        let ys = std::slice::from_raw_parts(y, ny);
        let data: Vec<Sample> = (0..n)
            .map(|k| Sample::new(us[k * cfg.m..(k + 1) * cfg.m].to_vec(), ys[k * cfg.l..(k + 1) * cfg.l].to_vec()))
            .collect();
        match EstimatorState::bootstrap(&data, &cfg) {
            Ok(state) => {
                *out = Box::into_raw(Box::new(SdEstimator { state }));
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Feeds one sample (`m` inputs, `l` outputs). On error the estimator is
/// left unchanged.
///
/// # Safety
/// `est` must be a live handle; `u` and `y` must hold `m` and `l` values.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_update(est: *mut SdEstimator, u: *const f64, y: *const f64) -> SdStatus {
    guard(|| {
        if est.is_null() || u.is_null() || y.is_null() {
            return fail(SdStatus::NullPointer, "null argument to sd_estimator_update");
        }
        let est = &mut *est;
        let (m, l) = (est.state.config().m, est.state.config().l);
        let us = std::slice::from_raw_parts(u, m);
        let ys = std::slice::from_raw_parts(y, l);
        match est.state.update(us, ys) {
            Ok(()) => SdStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// Absolute index of the newest sample absorbed.
///
/// # Safety
/// `est` must be a live handle and `k` writable.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_time(est: *const SdEstimator, k: *mut usize) -> SdStatus {
    guard(|| {
        if est.is_null() || k.is_null() {
            return fail(SdStatus::NullPointer, "null argument to sd_estimator_time");
        }
        *k = (*est).state.time();
        SdStatus::Ok
    })
}

/// Current delay estimates, row-major over (output, input). `delays` and
/// `valid` must each have room for `len >= l * m` entries; `valid[c]` is 1
/// when channel `c` carries a usable response.
///
/// # Safety
/// `est` must be a live handle; `delays` and `valid` must be writable for
/// `len` entries.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_delays(
    est: *const SdEstimator,
    criterion: u32,
    param: f64,
    delays: *mut usize,
    valid: *mut u8,
    len: usize,
) -> SdStatus {
    guard(|| {
        if est.is_null() || delays.is_null() || valid.is_null() {
            return fail(SdStatus::NullPointer, "null argument to sd_estimator_delays");
        }
        let state = &(*est).state;
        let cfg = state.config();
        let crit = match criterion {
            SD_CRITERION_RATIO => Criterion::Ratio { epsilon: if param > 0.0 { param } else { cfg.epsilon } },
            SD_CRITERION_THRESHOLD if param > 0.0 && param.is_finite() => Criterion::Threshold { threshold: param },
            SD_CRITERION_THRESHOLD => return fail(SdStatus::InvalidArgument, "threshold must be positive"),
            other => return fail(SdStatus::InvalidArgument, format!("unknown criterion {other}")),
        };
        let needed = cfg.l * cfg.m;
        if len < needed {
            return fail(SdStatus::BufferTooSmall, format!("need {needed} entries, got {len}"));
        }
        match state.delays(crit) {
            Ok(dm) => {
                let d = std::slice::from_raw_parts_mut(delays, needed);
                let v = std::slice::from_raw_parts_mut(valid, needed);
                d.copy_from_slice(&dm.delays);
                for (dst, src) in v.iter_mut().zip(&dm.valid) {
                    *dst = u8::from(*src);
                }
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Writes the Markov first block column (`h*l` rows, `m` columns, row-major)
/// into `out`, which must hold `len >= h * l * m` values. Entry
/// `[(r*l + j) * m + c]` is the lag-`r` response of output `j` to input `c`.
///
/// # Safety
/// `est` must be a live handle and `out` writable for `len` values.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_markov(est: *const SdEstimator, out: *mut f64, len: usize) -> SdStatus {
    guard(|| {
        if est.is_null() || out.is_null() {
            return fail(SdStatus::NullPointer, "null argument to sd_estimator_markov");
        }
        let state = &(*est).state;
        let cfg = state.config();
        let needed = cfg.h * cfg.l * cfg.m;
        if len < needed {
            return fail(SdStatus::BufferTooSmall, format!("need {needed} entries, got {len}"));
        }
        match state.markov_estimate() {
            Ok(est) => {
                let col = est.first_block_column();
                let dst = std::slice::from_raw_parts_mut(out, needed);
                for r in 0..col.nrows() {
                    for c in 0..col.ncols() {
                        dst[r * cfg.m + c] = col[(r, c)];
                    }
                }
                SdStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `est` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sd_estimator_free(est: *mut SdEstimator) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length plus one,
/// or 0 when there is no message.
///
/// # Safety
/// `buf` must be null or writable for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn sd_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sd_status_string(status: SdStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SdStatus::Ok => b"ok\0",
        SdStatus::NullPointer => b"null pointer\0",
        SdStatus::InvalidArgument => b"invalid argument\0",
        SdStatus::Dimension => b"dimension mismatch\0",
        SdStatus::NonFinite => b"non-finite value\0",
        SdStatus::InsufficientData => b"insufficient data\0",
        SdStatus::Excitation => b"input not persistently exciting\0",
        SdStatus::Breakdown => b"numerical breakdown\0",
        SdStatus::BufferTooSmall => b"buffer too small\0",
        SdStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}

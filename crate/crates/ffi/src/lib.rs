//! C interface to the rfauth testbench.
//!
//! Every function returns an [`RfStatus`]; on failure a message is kept
//! for the calling thread and can be read with `rfauth_last_error`.
//! Handles are opaque and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use num_complex::Complex64;
use rfauth::authenticator::TrainedAuthenticator;
use rfauth::harness::{export_csv, run_experiment, ExperimentConfig, ExperimentKind, ExperimentResults};
use rfauth::signal::IqSignal;
use rfauth::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidState = 2,
    TrainingFailure = 3,
    NumericFailure = 4,
    Format = 5,
    Config = 6,
    Io = 7,
    NullPointer = 8,
    Panic = 9,
}

/// Experiment configuration.
pub struct RfConfig(ExperimentConfig);

/// A trained discriminator loaded from a checkpoint.
pub struct RfAuthenticator(TrainedAuthenticator);

/// Results of an experiment run.
pub struct RfResults(ExperimentResults);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RfStatus {
    match e {
        Error::InvalidArgument(_) => RfStatus::InvalidArgument,
        Error::InvalidState(_) => RfStatus::InvalidState,
        Error::TrainingFailure(_) => RfStatus::TrainingFailure,
        Error::NumericFailure(_) => RfStatus::NumericFailure,
        Error::Format(_) => RfStatus::Format,
        Error::Config { .. } => RfStatus::Config,
        Error::Io { .. } => RfStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            RfStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(&msg);
            RfStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            RfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rfauth_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rfauth_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default configuration.
#[no_mangle]
pub extern "C" fn rfauth_config_default(out: *mut *mut RfConfig) -> RfStatus {
    guard(|| {
        let out = unsafe { out_arg(out, "out")? };
        *out = Box::into_raw(Box::new(RfConfig(ExperimentConfig::default())));
        Ok(())
    })
}

/// Configuration parsed from TOML text.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rfauth_config_from_toml(toml: *const c_char, out: *mut *mut RfConfig) -> RfStatus {
    guard(|| {
        let text = str_arg(toml, "toml")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(RfConfig(ExperimentConfig::from_toml_str(text)?)));
        Ok(())
    })
}

/// Configuration loaded from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rfauth_config_load(path: *const c_char, out: *mut *mut RfConfig) -> RfStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(RfConfig(ExperimentConfig::load(&path)?)));
        Ok(())
    })
}

/// Replaces the seed list with a single seed.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rfauth_config_set_seed(config: *mut RfConfig, seed: u64) -> RfStatus {
    guard(|| {
        let cfg = config.as_mut().ok_or(Fail::Null("config"))?;
        cfg.0.seeds = vec![seed];
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfauth_config_free(config: *mut RfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Loads a discriminator saved as `<stem>.rfnn` plus `<stem>.toml`.
///
/// # Safety
/// `stem` must be a NUL-terminated string; `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rfauth_authenticator_load(stem: *const c_char, out: *mut *mut RfAuthenticator) -> RfStatus {
    guard(|| {
        let stem = PathBuf::from(str_arg(stem, "stem")?);
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(RfAuthenticator(TrainedAuthenticator::load(&stem)?)));
        Ok(())
    })
}

/// Authenticates one received packet given as `n_samples` interleaved
/// (I, Q) pairs. Writes 1/0 to `accept` and the score to `score`.
///
/// # Safety
/// `iq` must point to `2 * n_samples` doubles; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfauth_authenticate(
    auth: *const RfAuthenticator,
    iq: *const f64,
    n_samples: usize,
    accept: *mut i32,
    score: *mut f64,
) -> RfStatus {
    guard(|| {
        let auth = handle(auth, "auth")?;
        if iq.is_null() {
            return Err(Fail::Null("iq"));
        }
        let accept = out_arg(accept, "accept")?;
        let score = out_arg(score, "score")?;
        let pairs = std::slice::from_raw_parts(iq, 2 * n_samples);
        let samples = pairs.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        let d = auth.0.authenticate(&IqSignal::new(samples, 1.0)?)?;
        *accept = i32::from(d.accept);
        *score = d.score;
        Ok(())
    })
}

/// # Safety
/// `auth` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfauth_authenticator_free(auth: *mut RfAuthenticator) {
    if !auth.is_null() {
        drop(Box::from_raw(auth));
    }
}

/// Runs the named experiment (`snr-sweep`, `epsilon-sweep`,
/// `transferability` or `single`) with `config`.
///
/// # Safety
/// `config` must be a live handle, `name` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rfauth_run_experiment(
    config: *const RfConfig,
    name: *const c_char,
    out: *mut *mut RfResults,
) -> RfStatus {
    guard(|| {
        let cfg = handle(config, "config")?;
        let kind = ExperimentKind::parse(str_arg(name, "name")?)?;
        let out = out_arg(out, "out")?;
        let mut cfg = cfg.0.clone();
        cfg.experiment = kind;
        let results = run_experiment(&cfg, &mut |_| {})?;
        *out = Box::into_raw(Box::new(RfResults(results)));
        Ok(())
    })
}

/// Number of attacked cells in `results`.
///
/// # Safety
/// `results` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn rfauth_results_cell_count(results: *const RfResults, count: *mut usize) -> RfStatus {
    guard(|| {
        let r = handle(results, "results")?;
        *out_arg(count, "count")? = r.0.cells.len();
        Ok(())
    })
}

/// Initial and final fooling rate of cell `index`.
///
/// # Safety
/// `results` must be a live handle and the outputs writable.
#[no_mangle]
pub unsafe extern "C" fn rfauth_results_cell_fooling(
    results: *const RfResults,
    index: usize,
    initial: *mut f64,
    final_rate: *mut f64,
) -> RfStatus {
    guard(|| {
        let r = handle(results, "results")?;
        let cell = r
            .0
            .cells
            .get(index)
            .ok_or_else(|| Fail::Arg(format!("cell index {index} out of range ({} cells)", r.0.cells.len())))?;
        *out_arg(initial, "initial")? = cell.initial_fooling;
        *out_arg(final_rate, "final_rate")? = cell.final_fooling;
        Ok(())
    })
}

/// Writes the CSV files for `results` into directory `dir`.
///
/// # Safety
/// `results` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rfauth_results_export(results: *const RfResults, dir: *const c_char) -> RfStatus {
    guard(|| {
        let r = handle(results, "results")?;
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        export_csv(&r.0, &dir)?;
        Ok(())
    })
}

/// # Safety
/// `results` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rfauth_results_free(results: *mut RfResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

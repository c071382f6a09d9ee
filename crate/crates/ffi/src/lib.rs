//! C ABI for `trunclife`.
//!
//! Every fallible function returns a [`TlStatus`]; on failure a message is
//! kept per thread and can be read with [`tl_last_error`]. Record sets are
//! opaque handles released with [`tl_records_free`]. Panics never cross the
//! boundary; they are reported as [`TlStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use trunclife::estimator::{self, FitConfig, ObservedRecord};
use trunclife::model::{self, ObservedTriple, StudyWindow};
use trunclife::simulator::{self, SimConfig};
use trunclife::{dataio, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TlStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument is out of range (window, rate, level, indicator, weight).
    InvalidArgument = 2,
    /// No observation with positive weight.
    EmptySample = 3,
    /// The fit or a numerical routine failed.
    Numerical = 4,
    /// A file could not be opened or read.
    Io = 5,
    /// Malformed input text.
    Parse = 6,
    /// Internal panic; the library state is unchanged.
    Panic = 7,
}

/// Opaque set of weighted observed records.
pub struct TlRecordSet {
    records: Vec<ObservedRecord>,
}

/// Output of `tl_fit`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TlFitResult {
    pub theta_hat: f64,
    pub se: f64,
    pub alpha_hat: f64,
    pub n_hat: f64,
    pub life_expectancy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// Total weight of the sample.
    pub m: f64,
    pub objective_at_max: f64,
    /// 1 if the maximizer converged, else 0.
    pub converged: c_int,
    /// 1 if the maximum lies on the edge of the rate domain, else 0.
    pub at_boundary: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> TlStatus {
    match e {
        Error::EmptySample => TlStatus::EmptySample,
        Error::Parse { .. } | Error::Json(_) | Error::InvalidTable(_) => TlStatus::Parse,
        Error::Open { .. } | Error::Io(_) => TlStatus::Io,
        Error::NonFiniteObjective { .. }
        | Error::SingularInformation { .. }
        | Error::NonFiniteEvaluation { .. }
        | Error::QuadratureNonConvergence { .. } => TlStatus::Numerical,
        _ => TlStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into a status code.
fn guard<F>(f: F) -> TlStatus
where
    F: FnOnce() -> Result<(), (TlStatus, String)>,
{
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TlStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".into());
            set_last_error(message);
            TlStatus::Panic
        }
    }
}

fn lib<T>(r: trunclife::Result<T>) -> Result<T, (TlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(name: &str) -> (TlStatus, String) {
    (TlStatus::NullPointer, format!("{name} is null"))
}

fn indicator(v: c_int, name: &str) -> Result<bool, (TlStatus, String)> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err((
            TlStatus::InvalidArgument,
            format!("{name} must be 0 or 1, got {v}"),
        )),
    }
}

fn boxed(records: Vec<ObservedRecord>) -> *mut TlRecordSet {
    Box::into_raw(Box::new(TlRecordSet { records }))
}

/// Message of the last failure on this thread, or null if the last call
/// succeeded. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn tl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New empty record set. Never null.
#[no_mangle]
pub extern "C" fn tl_records_new() -> *mut TlRecordSet {
    boxed(Vec::new())
}

/// Release a record set. Null is ignored.
///
/// # Safety
/// `set` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tl_records_free(set: *mut TlRecordSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of records in `set`; 0 for null.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_records_len(set: *const TlRecordSet) -> usize {
    set.as_ref().map_or(0, |s| s.records.len())
}

/// Append one record. `l` and `r` must be 0 or 1 and not both 1; the weight
/// must be finite and non-negative.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tl_records_push(
    set: *mut TlRecordSet,
    y: f64,
    l: c_int,
    r: c_int,
    weight: f64,
) -> TlStatus {
    guard(|| {
        let set = set.as_mut().ok_or_else(|| null("set"))?;
        let (l, r) = (indicator(l, "l")?, indicator(r, "r")?);
        if l && r {
            return Err((
                TlStatus::InvalidArgument,
                "(l, r) = (1, 1) is never observed".into(),
            ));
        }
        if !(y.is_finite() && weight.is_finite() && weight >= 0.0) {
            return Err((
                TlStatus::InvalidArgument,
                format!("y must be finite and weight non-negative, got y = {y}, weight = {weight}"),
            ));
        }
        set.records.push(ObservedRecord::new(y, l, r, weight));
        Ok(())
    })
}

/// Load a record CSV (`y,l,r[,weight]`) into a new set stored in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_records_load_csv(
    path: *const c_char,
    out: *mut *mut TlRecordSet,
) -> TlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| {
            (
                TlStatus::InvalidArgument,
                "path is not valid UTF-8".to_string(),
            )
        })?;
        *out = boxed(lib(dataio::read_records(Path::new(path)))?);
        Ok(())
    })
}

/// The bundled 2018-2019 enterprise records, in a new set stored in `*out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_records_enterprise(out: *mut *mut TlRecordSet) -> TlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = boxed(lib(dataio::enterprise_records())?);
        Ok(())
    })
}

/// Simulate one observed sample into a new set stored in `*out`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_simulate(
    theta0: f64,
    s: f64,
    g: f64,
    n: u64,
    seed: u64,
    out: *mut *mut TlRecordSet,
) -> TlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let cfg = lib(StudyWindow::new(s, g).and_then(|w| SimConfig::new(theta0, w, n, seed)))?;
        *out = boxed(lib(simulator::simulate_sample(&cfg))?.records);
        Ok(())
    })
}

/// Fit the rate to `set` for study length `s` and cohort span `g`, with a
/// normal interval at coverage `level`.
///
/// # Safety
/// `set` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_fit(
    set: *const TlRecordSet,
    s: f64,
    g: f64,
    level: f64,
    out: *mut TlFitResult,
) -> TlStatus {
    guard(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let w = lib(StudyWindow::new(s, g))?;
        let stats = lib(estimator::summarize(&set.records, &w))?;
        let cfg = FitConfig {
            level,
            ..FitConfig::default()
        };
        let f = lib(estimator::fit_mle(&stats, &w, &cfg))?;
        *out = TlFitResult {
            theta_hat: f.theta_hat,
            se: f.se,
            alpha_hat: f.alpha_hat,
            n_hat: f.n_hat,
            life_expectancy: f.life_expectancy,
            ci_low: f.ci_low,
            ci_high: f.ci_high,
            level: f.level,
            m: f.m,
            objective_at_max: f.objective_at_max,
            converged: f.converged.into(),
            at_boundary: f.at_boundary.into(),
        };
        Ok(())
    })
}

unsafe fn scalar<F>(out: *mut f64, f: F) -> TlStatus
where
    F: FnOnce() -> trunclife::Result<f64>,
{
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = lib(f())?;
        Ok(())
    })
}

/// Probability that a unit of rate `theta` is observed.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_alpha(theta: f64, s: f64, g: f64, out: *mut f64) -> TlStatus {
    scalar(out, || model::alpha(theta, &StudyWindow::new(s, g)?))
}

/// Curvature of the population criterion at its maximum `theta`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_eta(theta: f64, s: f64, g: f64, out: *mut f64) -> TlStatus {
    scalar(out, || model::eta(theta, &StudyWindow::new(s, g)?))
}

/// Density of the observed triple `(y, l, r)`; 0 off the support.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tl_obs_density(
    y: f64,
    l: c_int,
    r: c_int,
    theta: f64,
    s: f64,
    g: f64,
    out: *mut f64,
) -> TlStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let (l, r) = (indicator(l, "l")?, indicator(r, "r")?);
        let w = lib(StudyWindow::new(s, g))?;
        lib(model::alpha(theta, &w))?;
        *out = model::obs_density(&ObservedTriple::new(y, l, r), theta, &w);
        Ok(())
    })
}

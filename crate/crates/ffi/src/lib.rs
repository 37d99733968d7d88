//! C ABI over `disorder_lab`.
//!
//! Every fallible call returns a `DlStatus`; on failure the message is kept
//! per thread and read with `dl_last_error_message`. Handles are opaque and
//! owned by the caller until passed to the matching `_free`.

use disorder_lab::dirichlet::{prime_sum_p, PrimeSumSpec};
use disorder_lab::phases::{make_phase_context, PhaseContext};
use disorder_lab::primes::{PrimeTable, SieveOptions, DEFAULT_SIEVE_CAP};
use disorder_lab::runner::{self, Format, RunConfig};
use disorder_lab::zeta::{hardy_z, rs_theta};
use disorder_lab::LabError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Capacity = 3,
    OutOfRange = 4,
    Domain = 5,
    Precision = 6,
    Singularity = 7,
    Ordering = 8,
    Alignment = 9,
    Contract = 10,
    Calibration = 11,
    Usage = 12,
    Schema = 13,
    Integrity = 14,
    Io = 15,
    Panic = 16,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DlFormat {
    Csv = 0,
    Json = 1,
}

/// Sieved primes with fixed-point logarithms.
pub struct DlPrimeTable(PrimeTable);

/// Scale e^{N^λ} and precision for one (N, λ).
pub struct DlPhaseContext(PhaseContext);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &LabError) -> DlStatus {
    match e {
        LabError::Capacity { .. } => DlStatus::Capacity,
        LabError::OutOfRange(_) => DlStatus::OutOfRange,
        LabError::Domain(_) => DlStatus::Domain,
        LabError::Precision { .. } => DlStatus::Precision,
        LabError::Singularity(_) => DlStatus::Singularity,
        LabError::Ordering(_) => DlStatus::Ordering,
        LabError::Alignment(_) => DlStatus::Alignment,
        LabError::Contract(_) => DlStatus::Contract,
        LabError::Calibration(_) => DlStatus::Calibration,
        LabError::Usage(_) => DlStatus::Usage,
        LabError::Schema { .. } => DlStatus::Schema,
        LabError::Integrity(_) => DlStatus::Integrity,
        LabError::Io(_) => DlStatus::Io,
    }
}

fn guard<F: FnOnce() -> Result<(), (DlStatus, String)>>(f: F) -> DlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside disorder-lab".into());
            DlStatus::Panic
        }
    }
}

fn lab<T>(r: Result<T, LabError>) -> Result<T, (DlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DlStatus, String) {
    (DlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (DlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (DlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn dl_clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Sieve primes up to `bound` with `log_bits` bits of fixed-point logarithm.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dl_prime_table_new(bound: u64, log_bits: u32, out: *mut *mut DlPrimeTable) -> DlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = SieveOptions {
            cap: DEFAULT_SIEVE_CAP,
            log_bits,
        };
        let table = lab(PrimeTable::sieve(bound, &opts))?;
        *out = Box::into_raw(Box::new(DlPrimeTable(table)));
        Ok(())
    })
}

/// # Safety
/// `table` must come from `dl_prime_table_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dl_prime_table_free(table: *mut DlPrimeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of primes in the table; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dl_prime_table_len(table: *const DlPrimeTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Σ_{p ≤ x} 1/p.
///
/// # Safety
/// `table` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_prime_table_mertens_sum(table: *const DlPrimeTable, x: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lab(t.0.mertens_sum(x))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_phase_context_new(
    n: f64,
    lambda: f64,
    guard_bits: u32,
    out: *mut *mut DlPhaseContext,
) -> DlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ctx = lab(make_phase_context(n, lambda, guard_bits))?;
        *out = Box::into_raw(Box::new(DlPhaseContext(ctx)));
        Ok(())
    })
}

/// # Safety
/// `ctx` must come from `dl_phase_context_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dl_phase_context_free(ctx: *mut DlPhaseContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// Working precision of the context in bits; 0 for NULL.
///
/// # Safety
/// `ctx` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dl_phase_context_precision_bits(ctx: *const DlPhaseContext) -> u32 {
    ctx.as_ref().map_or(0, |c| c.0.precision_bits())
}

/// u e^{N^λ} log p mod 2π for the prime at `index` in `table`.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_reduce_phase(
    ctx: *const DlPhaseContext,
    table: *const DlPrimeTable,
    index: usize,
    u: f64,
    out: *mut f64,
) -> DlStatus {
    guard(|| {
        let c = ctx.as_ref().ok_or_else(|| null("ctx"))?;
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if index >= t.0.len() {
            return Err((DlStatus::OutOfRange, format!("prime index {index} >= {}", t.0.len())));
        }
        *out = lab(c.0.reduce_phase(u, t.0.log(index)))?;
        Ok(())
    })
}

/// Normalized prime sum P(λ, n; k, N, u), written as (re, im).
///
/// # Safety
/// Handles must be live and `out_re`, `out_im` writable.
#[no_mangle]
pub unsafe extern "C" fn dl_prime_sum(
    ctx: *const DlPhaseContext,
    table: *const DlPrimeTable,
    k: u32,
    exponent: u32,
    u: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DlStatus {
    guard(|| {
        let c = ctx.as_ref().ok_or_else(|| null("ctx"))?;
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        if out_re.is_null() || out_im.is_null() {
            return Err(null("out"));
        }
        let spec = lab(PrimeSumSpec::new(c.0.n(), c.0.lambda(), k, exponent))?;
        let p = lab(prime_sum_p(&spec, &c.0, &t.0, u))?;
        *out_re = p.re;
        *out_im = p.im;
        Ok(())
    })
}

/// Hardy's Z(t).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_hardy_z(t: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lab(hardy_z(t))?;
        Ok(())
    })
}

/// Riemann–Siegel θ(t).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dl_rs_theta(t: f64, out: *mut f64) -> DlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lab(rs_theta(t))?;
        Ok(())
    })
}

/// Run a named experiment from config text and return the encoded report.
///
/// `experiment` may be NULL when the config names it. On success `*report`
/// holds a NUL-terminated string to release with `dl_string_free`, and
/// `*exit_code` the CLI exit code (0 all pass, 1 a check failed). On failure
/// `*exit_code` is 2 for usage and schema errors and 3 otherwise.
///
/// # Safety
/// String arguments must be NUL-terminated; output pointers writable.
#[no_mangle]
pub unsafe extern "C" fn dl_run_experiment(
    experiment: *const c_char,
    config_text: *const c_char,
    seed: u64,
    threads: u32,
    format: DlFormat,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> DlStatus {
    if !exit_code.is_null() {
        *exit_code = 3;
    }
    guard(|| {
        if report.is_null() || exit_code.is_null() {
            return Err(null("out"));
        }
        *report = ptr::null_mut();
        let name = if experiment.is_null() {
            None
        } else {
            Some(text(experiment, "experiment")?)
        };
        let cfg_text = text(config_text, "config_text")?;
        let outcome = RunConfig::parse(name, cfg_text).and_then(|mut cfg| {
            cfg.seed = seed;
            cfg.threads = (threads > 0).then_some(threads as usize);
            cfg.format = match format {
                DlFormat::Csv => Format::Csv,
                DlFormat::Json => Format::Json,
            };
            let r = runner::run_experiment(&cfg);
            let code = runner::exit_code(&r);
            r.and_then(|r| runner::emit_report(&r, cfg.format)).map(|b| (b, code))
        });
        match outcome {
            Ok((bytes, code)) => {
                *exit_code = code;
                let s = CString::new(bytes).map_err(|_| (DlStatus::Integrity, "report contains NUL".to_string()))?;
                *report = s.into_raw();
                Ok(())
            }
            Err(e) => {
                *exit_code = runner::error_exit_code(&e);
                lab(Err(e))
            }
        }
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn dl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_distinct_codes() {
        let e = LabError::Schema {
            field: "x".into(),
            reason: "r".into(),
        };
        assert_eq!(status_of(&e), DlStatus::Schema);
        assert_eq!(status_of(&LabError::Usage("u".into())), DlStatus::Usage);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), DlStatus::Panic);
        let msg = unsafe { CStr::from_ptr(dl_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("panic"));
    }
}

//! C ABI for the duffing solver library.
//!
//! Conventions:
//! - Handles (`DuffingConfig`, `DuffingSolveReport`) are opaque; create them
//!   through the constructors here and release them with the matching
//!   `*_free` function exactly once.
//! - Every fallible function returns a [`DuffingStatus`]; on failure a
//!   thread-local message is available from
//!   [`duffing_last_error_message`] until the next failing call on the same
//!   thread.
//! - Strings returned through out-pointers are NUL-terminated, allocated by
//!   this library, and must be released with [`duffing_string_free`].
//! - Array copies are node-major: node `i` occupies entries
//!   `i*dim .. (i+1)*dim`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use duffing::bvp::{solve_duffing, SolveReport};
use duffing::config::Config;
use duffing::error::Error;
use duffing::hypothesis::compile_report;
use duffing::relaxation::relax_experiment;

/// Status codes mirroring the CLI exit taxonomy.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DuffingStatus {
    Ok = 0,
    /// A required pointer argument was null or otherwise unusable.
    NullArgument = 1,
    /// The configuration failed to parse or validate.
    ConfigError = 2,
    /// The fixed-point iteration hit its cap; a report is still produced.
    DidNotConverge = 3,
    /// A numerical routine failed (shooting divergence, bad parameters).
    NumericalError = 4,
    /// An internal invariant was violated.
    InternalError = 5,
}

/// Opaque parsed configuration.
pub struct DuffingConfig {
    config: Config,
}

/// Opaque solve outcome.
pub struct DuffingSolveReport {
    report: SolveReport,
    p: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).ok();
    });
}

fn status_for(e: &Error) -> DuffingStatus {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => DuffingStatus::ConfigError,
        Error::FixedPointDidNotConverge { .. } => DuffingStatus::DidNotConverge,
        _ => DuffingStatus::NumericalError,
    }
}

fn fail(e: &Error) -> DuffingStatus {
    set_error(&e.to_string());
    status_for(e)
}

fn guarded(f: impl FnOnce() -> DuffingStatus) -> DuffingStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            DuffingStatus::InternalError
        }
    }
}

unsafe fn read_c_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

fn export_string(s: String, out: *mut *mut c_char) -> DuffingStatus {
    let cleaned: String = s.chars().filter(|c| *c != '\0').collect();
    match CString::new(cleaned) {
        Ok(cs) => {
            unsafe { *out = cs.into_raw() };
            DuffingStatus::Ok
        }
        Err(_) => {
            set_error("string conversion failed");
            DuffingStatus::InternalError
        }
    }
}

/// Library version as a static string; never freed by the caller.
#[no_mangle]
pub extern "C" fn duffing_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn duffing_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(ptr::null())
    })
}

/// Parse a JSON configuration document into an opaque handle.
///
/// # Safety
/// `json` must point to a NUL-terminated string and `out` must be a valid
/// pointer; on success the caller owns the handle and must release it with
/// [`duffing_config_free`].
#[no_mangle]
pub unsafe extern "C" fn duffing_config_parse(
    json: *const c_char,
    out: *mut *mut DuffingConfig,
) -> DuffingStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DuffingStatus::NullArgument;
        }
        let Some(text) = read_c_str(json) else {
            set_error("null or non-UTF8 configuration string");
            return DuffingStatus::NullArgument;
        };
        match Config::from_json(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(DuffingConfig { config }));
                DuffingStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must be a handle returned by [`duffing_config_parse`], not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn duffing_config_free(cfg: *mut DuffingConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Solve the inclusion described by the configuration.
///
/// On `DUFFING_DID_NOT_CONVERGE` the last iterate is still returned through
/// `out` so callers can inspect it.
///
/// # Safety
/// `cfg` must be a live handle from [`duffing_config_parse`]; `out` must be
/// valid. A returned report must be released with [`duffing_report_free`].
#[no_mangle]
pub unsafe extern "C" fn duffing_solve(
    cfg: *const DuffingConfig,
    out: *mut *mut DuffingSolveReport,
) -> DuffingStatus {
    guarded(|| {
        if cfg.is_null() || out.is_null() {
            set_error("null argument");
            return DuffingStatus::NullArgument;
        }
        let config = &(*cfg).config;
        let prob = match config.build_problem() {
            Ok(p) => p,
            Err(e) => return fail(&e),
        };
        let opts = match config.solver_options() {
            Ok(o) => o,
            Err(e) => return fail(&e),
        };
        match solve_duffing(&prob, &opts) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(DuffingSolveReport { report, p: prob.p }));
                DuffingStatus::Ok
            }
            Err(Error::FixedPointDidNotConverge { last }) => {
                *out = Box::into_raw(Box::new(DuffingSolveReport {
                    report: *last,
                    p: prob.p,
                }));
                set_error("fixed point did not converge");
                DuffingStatus::DidNotConverge
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a solve report. Null is ignored.
///
/// # Safety
/// `report` must come from [`duffing_solve`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn duffing_report_free(report: *mut DuffingSolveReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle from [`duffing_solve`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_converged(report: *const DuffingSolveReport) -> bool {
    !report.is_null() && (*report).report.converged
}

/// # Safety
/// `report` must be a live handle from [`duffing_solve`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_iterations(report: *const DuffingSolveReport) -> u64 {
    if report.is_null() {
        return 0;
    }
    (*report).report.iterations as u64
}

/// Sup-norm residual of the reported trajectory against its own data.
///
/// # Safety
/// `report` must be a live handle from [`duffing_solve`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_residual(report: *const DuffingSolveReport) -> f64 {
    if report.is_null() {
        return f64::NAN;
    }
    (*report).report.residual_sup
}

/// Number of grid nodes (subintervals plus one).
///
/// # Safety
/// `report` must be a live handle from [`duffing_solve`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_num_nodes(report: *const DuffingSolveReport) -> u64 {
    if report.is_null() {
        return 0;
    }
    (*report).report.u.grid().num_nodes() as u64
}

/// # Safety
/// `report` must be a live handle from [`duffing_solve`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_dim(report: *const DuffingSolveReport) -> u64 {
    if report.is_null() {
        return 0;
    }
    (*report).report.u.dim() as u64
}

unsafe fn copy_slice(src: &[f64], buf: *mut f64, len: u64) -> DuffingStatus {
    if buf.is_null() {
        set_error("null buffer");
        return DuffingStatus::NullArgument;
    }
    if (len as usize) < src.len() {
        set_error("buffer too small");
        return DuffingStatus::NullArgument;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    DuffingStatus::Ok
}

/// Copy the grid nodes; `buf` needs `num_nodes` entries.
///
/// # Safety
/// `report` must be live and `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn duffing_report_copy_times(
    report: *const DuffingSolveReport,
    buf: *mut f64,
    len: u64,
) -> DuffingStatus {
    guarded(|| {
        if report.is_null() {
            set_error("null report");
            return DuffingStatus::NullArgument;
        }
        let grid = (*report).report.u.grid();
        let times: Vec<f64> = grid.nodes().collect();
        copy_slice(&times, buf, len)
    })
}

/// Copy the trajectory samples; `buf` needs `num_nodes * dim` entries.
///
/// # Safety
/// `report` must be live and `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn duffing_report_copy_solution(
    report: *const DuffingSolveReport,
    buf: *mut f64,
    len: u64,
) -> DuffingStatus {
    guarded(|| {
        if report.is_null() {
            set_error("null report");
            return DuffingStatus::NullArgument;
        }
        copy_slice((*report).report.u.values(), buf, len)
    })
}

/// Copy the derivative samples; `buf` needs `num_nodes * dim` entries.
///
/// # Safety
/// `report` must be live and `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn duffing_report_copy_derivative(
    report: *const DuffingSolveReport,
    buf: *mut f64,
    len: u64,
) -> DuffingStatus {
    guarded(|| {
        if report.is_null() {
            set_error("null report");
            return DuffingStatus::NullArgument;
        }
        copy_slice((*report).report.du.values(), buf, len)
    })
}

/// Copy the recorded selection; `buf` needs `num_nodes * dim` entries.
///
/// # Safety
/// `report` must be live and `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn duffing_report_copy_selection(
    report: *const DuffingSolveReport,
    buf: *mut f64,
    len: u64,
) -> DuffingStatus {
    guarded(|| {
        if report.is_null() {
            set_error("null report");
            return DuffingStatus::NullArgument;
        }
        copy_slice((*report).report.selection.values(), buf, len)
    })
}

/// Solve metadata (convergence, norms, shooting constant) as a JSON string.
///
/// # Safety
/// `report` must be live; `out` must be valid and the returned string must
/// be released with [`duffing_string_free`].
#[no_mangle]
pub unsafe extern "C" fn duffing_report_meta_json(
    report: *const DuffingSolveReport,
    out: *mut *mut c_char,
) -> DuffingStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return DuffingStatus::NullArgument;
        }
        let handle = &*report;
        match duffing::output::solve_sidecar_json(&handle.report, handle.p, None) {
            Ok(json) => export_string(json, out),
            Err(e) => fail(&e),
        }
    })
}

/// Compile the admissibility report for a configuration as a JSON string.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid and the returned string
/// must be released with [`duffing_string_free`].
#[no_mangle]
pub unsafe extern "C" fn duffing_check_json(
    cfg: *const DuffingConfig,
    out: *mut *mut c_char,
) -> DuffingStatus {
    guarded(|| {
        if cfg.is_null() || out.is_null() {
            set_error("null argument");
            return DuffingStatus::NullArgument;
        }
        let config = &(*cfg).config;
        let outcome = config.build_problem().and_then(|prob| {
            let witness = config.build_witness()?;
            compile_report(&prob, &witness, config.check_eta(), config.solver.seed)
        });
        match outcome {
            Ok(report) => export_string(report.to_json(), out),
            Err(e) => fail(&e),
        }
    })
}

/// Run the relaxation experiment; per-level results as a JSON array string.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be valid and the returned string
/// must be released with [`duffing_string_free`].
#[no_mangle]
pub unsafe extern "C" fn duffing_relax_json(
    cfg: *const DuffingConfig,
    out: *mut *mut c_char,
) -> DuffingStatus {
    guarded(|| {
        if cfg.is_null() || out.is_null() {
            set_error("null argument");
            return DuffingStatus::NullArgument;
        }
        let config = &(*cfg).config;
        let relax_cfg = match config.relax_config() {
            Ok(Some(rc)) => rc,
            Ok(None) => {
                set_error("config has no relax section");
                return DuffingStatus::ConfigError;
            }
            Err(e) => return fail(&e),
        };
        match relax_experiment(&relax_cfg) {
            Ok(outcome) => {
                let levels: Vec<serde_json::Value> = outcome
                    .levels
                    .iter()
                    .map(|l| {
                        serde_json::json!({
                            "level": l.level,
                            "c1_distance": l.c1_distance,
                            "residual_sup": l.residual_sup,
                            "weak_diag": l.weak_diag,
                            "eps_n": l.eps_n,
                            "converged": l.converged,
                        })
                    })
                    .collect();
                let doc = serde_json::json!({
                    "xi_hat": outcome.gate.xi_hat,
                    "levels": levels,
                });
                export_string(
                    serde_json::to_string_pretty(&doc).expect("json serialization"),
                    out,
                )
            }
            Err(e) => fail(&e),
        }
    })
}

/// `pi_p` constant; see the library documentation.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn duffing_pi_p(p: f64, out: *mut f64) -> DuffingStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DuffingStatus::NullArgument;
        }
        match duffing::eigen::pi_p(p) {
            Ok(v) => {
                *out = v;
                DuffingStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// n-th Dirichlet eigenvalue on `[0, b]` for exponent `p`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn duffing_eigen_lambda(
    p: f64,
    b: f64,
    n: u32,
    out: *mut f64,
) -> DuffingStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return DuffingStatus::NullArgument;
        }
        let result = duffing::eigen::EigenParams::new(p, b, 1)
            .and_then(|params| duffing::eigen::lambda_n(&params, n));
        match result {
            Ok(v) => {
                *out = v;
                DuffingStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been returned through one of this library's out-pointers,
/// not yet freed.
#[no_mangle]
pub unsafe extern "C" fn duffing_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

//! C ABI over the mirror-descent crate.
//!
//! The surface follows the usual opaque-handle pattern: problems and run
//! traces are heap objects behind `MdProblem*` / `MdTrace*`, every fallible
//! call returns an [`MdStatus`] code, and outputs land in caller-provided
//! out-parameters. A human-readable message for the most recent failure on
//! the calling thread is available through [`md_last_error_message`]. The
//! matching header is generated into `include/mirror_descent.h` at build
//! time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mirror_descent::analysis::{audit_trace, BoundParams};
use mirror_descent::error::Error;
use mirror_descent::problems::{self, TestProblem};
use mirror_descent::schedule::{StepSizeRule, WeightScheme};
use mirror_descent::solver::{RunStatus, RunTrace};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownProblem = 3,
    ConfigError = 4,
    UnsupportedGeometry = 5,
    /// The problem's geometry has no closed-form bound constant; pass a
    /// positive `r` explicitly.
    NeedsExplicitR = 6,
    ZeroGradient = 7,
    NumericalError = 8,
    MissingOptimum = 9,
    BufferTooSmall = 10,
    InternalError = 11,
}

/// Step-size rule selector for [`MdRunParams`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdRule {
    /// Constant step `gamma0`.
    Fixed = 0,
    /// Adaptive rule `sqrt(2 sigma) / (||g_k|| sqrt(k))`; not monotone.
    Nesterov = 1,
    /// Monotone rule `sqrt(2 sigma R) / (G_k k^{a/2})`; needs no Lipschitz
    /// constant.
    LipschitzFree = 2,
}

/// Run configuration. `gamma0` is read only by the fixed rule; `a` and `r`
/// only by the Lipschitz-free rule. A nonpositive `r` requests the
/// closed-form worst case for the problem's geometry, which exists only for
/// Euclidean problems.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdRunParams {
    pub rule: MdRule,
    pub gamma0: f64,
    pub a: f64,
    pub r: f64,
    /// Ergodic weight exponent, `m >= -1` (composite problems need `m <= 0`).
    pub m: f64,
    pub iterations: usize,
}

/// One executed iteration of a finished run. `h_value` is NaN for
/// non-composite runs.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdTraceRow {
    pub k: usize,
    pub gamma: f64,
    pub grad_dual_norm: f64,
    pub omega: f64,
    pub f_value: f64,
    pub h_value: f64,
}

/// Bound audit of a finished run. NaN marks an unavailable field; when
/// `diagnostic_only` is nonzero the rule carries no bound guarantee and
/// `satisfied` is meaningless.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MdBoundReport {
    pub observed_gap: f64,
    pub theorem_rhs: f64,
    pub corollary_rhs: f64,
    pub max_grad_dual: f64,
    pub effective_iterations: usize,
    pub satisfied: u8,
    pub diagnostic_only: u8,
}

/// Opaque problem handle.
pub struct MdProblem {
    inner: TestProblem,
    /// The `r` actually used by the last applicable run construction.
    default_r: Option<f64>,
}

/// Opaque trace handle, remembering which problem produced it.
pub struct MdTrace {
    inner: RunTrace,
    problem_name: String,
    m: f64,
    r_used: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized: String = message.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(error: &Error) -> MdStatus {
    set_last_error(&error.to_string());
    match error {
        Error::UnknownProblem(_) => MdStatus::UnknownProblem,
        Error::Config(_) | Error::InvalidM(..) => MdStatus::ConfigError,
        Error::UnsupportedGeometry(_) => MdStatus::UnsupportedGeometry,
        Error::NeedsExplicitR => MdStatus::NeedsExplicitR,
        Error::ZeroGradient { .. } => MdStatus::ZeroGradient,
        Error::NumericalOverflow | Error::NonFinite(_) => MdStatus::NumericalError,
        Error::MissingOptimum => MdStatus::MissingOptimum,
        Error::Domain(_) | Error::DimensionMismatch { .. } => MdStatus::InvalidArgument,
        _ => MdStatus::InternalError,
    }
}

fn guarded(body: impl FnOnce() -> MdStatus) -> MdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MdStatus::InternalError
        }
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn md_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message on this thread into `buf` (always
/// nul-terminated when `cap > 0`) and returns the full message length in
/// bytes, excluding the terminator. A `NULL` buffer just queries the length.
///
/// # Safety
/// `buf` must be valid for writes of `cap` bytes, or `NULL`.
#[no_mangle]
pub unsafe extern "C" fn md_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Builds a problem from its registry name (`example1`, `sqrt-simplex-n{n}`,
/// `pwl-max-n{n}-s{seed}`, `lasso-box-n{n}-l{lambda}-s{seed}`). On success
/// the caller owns the handle and must release it with [`md_problem_free`].
///
/// # Safety
/// `name` must be a valid nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn md_problem_from_name(
    name: *const c_char,
    out: *mut *mut MdProblem,
) -> MdStatus {
    if name.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let name = match unsafe { CStr::from_ptr(name) }.to_str() {
        Ok(s) => s,
        Err(_) => {
            set_last_error("problem name is not valid UTF-8");
            return MdStatus::InvalidArgument;
        }
    };
    guarded(|| match problems::by_name(name) {
        Ok(problem) => {
            let default_r = problems::safe_r(&problem.feasible, problem.map).ok();
            let handle = Box::new(MdProblem {
                inner: problem,
                default_r,
            });
            unsafe { *out = Box::into_raw(handle) };
            MdStatus::Ok
        }
        Err(e) => status_for(&e),
    })
}

/// Releases a problem handle; a `NULL` handle is ignored.
///
/// # Safety
/// `problem` must have come from [`md_problem_from_name`] and not have been
/// freed already.
#[no_mangle]
pub unsafe extern "C" fn md_problem_free(problem: *mut MdProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Problem dimension.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn md_problem_dim(problem: *const MdProblem, out: *mut usize) -> MdStatus {
    if problem.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    unsafe { *out = (*problem).inner.dim() };
    MdStatus::Ok
}

/// Closed-form worst-case bound constant for the problem's geometry.
///
/// # Safety
/// `problem` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn md_problem_safe_r(problem: *const MdProblem, out: *mut f64) -> MdStatus {
    if problem.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let p = unsafe { &*problem };
    match problems::safe_r(&p.inner.feasible, p.inner.map) {
        Ok(r) => {
            unsafe { *out = r };
            MdStatus::Ok
        }
        Err(e) => status_for(&e),
    }
}

fn build_rule(
    problem: &MdProblem,
    params: &MdRunParams,
) -> Result<(StepSizeRule, Option<f64>), Error> {
    let sigma = problem.inner.map.sigma();
    match params.rule {
        MdRule::Fixed => Ok((StepSizeRule::fixed(params.gamma0)?, None)),
        MdRule::Nesterov => Ok((StepSizeRule::nesterov(sigma)?, None)),
        MdRule::LipschitzFree => {
            let r = if params.r > 0.0 {
                params.r
            } else {
                problem.default_r.ok_or(Error::NeedsExplicitR)?
            };
            Ok((StepSizeRule::lipschitz_free(params.a, r, sigma)?, Some(r)))
        }
    }
}

/// Runs the solver from the problem's canonical start. On success the caller
/// owns the trace and must release it with [`md_trace_free`].
///
/// # Safety
/// All pointers must be valid; `problem` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn md_run(
    problem: *const MdProblem,
    params: *const MdRunParams,
    out: *mut *mut MdTrace,
) -> MdStatus {
    if problem.is_null() || params.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let problem = unsafe { &*problem };
    let params = unsafe { *params };
    guarded(|| {
        let built = build_rule(problem, &params).and_then(|(rule, r_used)| {
            let weights = WeightScheme::new(params.m)?;
            let trace = problem.inner.run(rule, weights, params.iterations)?;
            Ok((trace, r_used))
        });
        match built {
            Ok((trace, r_used)) => {
                let handle = Box::new(MdTrace {
                    inner: trace,
                    problem_name: problem.inner.name.clone(),
                    m: params.m,
                    r_used,
                });
                unsafe { *out = Box::into_raw(handle) };
                MdStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

/// Releases a trace handle; a `NULL` handle is ignored.
///
/// # Safety
/// `trace` must have come from [`md_run`] and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn md_trace_free(trace: *mut MdTrace) {
    if !trace.is_null() {
        drop(unsafe { Box::from_raw(trace) });
    }
}

/// Number of executed iterations.
///
/// # Safety
/// `trace` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn md_trace_len(trace: *const MdTrace, out: *mut usize) -> MdStatus {
    if trace.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    unsafe { *out = (*trace).inner.completed() };
    MdStatus::Ok
}

/// Iteration at which the run stopped on a zero subgradient, or 0 when the
/// full budget executed.
///
/// # Safety
/// `trace` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn md_trace_stopped_at(trace: *const MdTrace, out: *mut usize) -> MdStatus {
    if trace.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    unsafe {
        *out = match (*trace).inner.status {
            RunStatus::CompletedN => 0,
            RunStatus::StoppedZeroGradient(k) => k,
        }
    };
    MdStatus::Ok
}

/// Copies row `index` (0-based) of the trace.
///
/// # Safety
/// `trace` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn md_trace_row(
    trace: *const MdTrace,
    index: usize,
    out: *mut MdTraceRow,
) -> MdStatus {
    if trace.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let trace = unsafe { &*trace };
    let Some(row) = trace.inner.rows.get(index) else {
        set_last_error("row index out of range");
        return MdStatus::InvalidArgument;
    };
    unsafe {
        *out = MdTraceRow {
            k: row.k,
            gamma: row.gamma,
            grad_dual_norm: row.grad_dual_norm,
            omega: row.omega,
            f_value: row.f_value,
            h_value: row.h_value.unwrap_or(f64::NAN),
        }
    };
    MdStatus::Ok
}

/// Copies the weak-ergodic average into `buf` and reports the dimension in
/// `written`. Fails with `BufferTooSmall` when `cap` is insufficient.
///
/// # Safety
/// `buf` must be valid for `cap` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_trace_solution(
    trace: *const MdTrace,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> MdStatus {
    unsafe { copy_vector(trace, buf, cap, written, |t| t.inner.x_hat.as_slice()) }
}

/// Copies the last iterate into `buf`; same contract as [`md_trace_solution`].
///
/// # Safety
/// `buf` must be valid for `cap` doubles; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn md_trace_last_iterate(
    trace: *const MdTrace,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
) -> MdStatus {
    unsafe { copy_vector(trace, buf, cap, written, |t| t.inner.x_last.as_slice()) }
}

unsafe fn copy_vector(
    trace: *const MdTrace,
    buf: *mut f64,
    cap: usize,
    written: *mut usize,
    select: impl Fn(&MdTrace) -> &[f64],
) -> MdStatus {
    if trace.is_null() || buf.is_null() || written.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let trace = unsafe { &*trace };
    let values = select(trace);
    if cap < values.len() {
        set_last_error("output buffer too small");
        unsafe { *written = values.len() };
        return MdStatus::BufferTooSmall;
    }
    unsafe {
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        *written = values.len();
    }
    MdStatus::Ok
}

/// Audits a finished trace against the bound for the rule that produced it.
/// `r` overrides the bound constant; pass a nonpositive value to reuse the
/// `r` the run itself used (Lipschitz-free runs) or the geometry's closed
/// form. The trace must come from the same problem handle's registry name.
///
/// # Safety
/// All pointers must be valid; `problem` and `trace` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn md_audit(
    problem: *const MdProblem,
    trace: *const MdTrace,
    r: f64,
    out: *mut MdBoundReport,
) -> MdStatus {
    if problem.is_null() || trace.is_null() || out.is_null() {
        set_last_error("null pointer argument");
        return MdStatus::NullPointer;
    }
    let problem = unsafe { &*problem };
    let trace = unsafe { &*trace };
    if trace.problem_name != problem.inner.name {
        set_last_error("trace was produced by a different problem");
        return MdStatus::InvalidArgument;
    }
    guarded(|| {
        let r = if r > 0.0 {
            Some(r)
        } else {
            trace.r_used.or(problem.default_r)
        };
        let Some(r) = r else {
            return status_for(&Error::NeedsExplicitR);
        };
        let params = match BoundParams::new(
            r,
            problem.inner.map.sigma(),
            trace.m,
            trace.inner.completed().max(1),
        ) {
            Ok(p) => p,
            Err(e) => return status_for(&e),
        };
        match audit_trace(&trace.inner, &problem.inner, &params) {
            Ok(outcome) => {
                let report = outcome.report;
                unsafe {
                    *out = MdBoundReport {
                        observed_gap: report.observed_gap,
                        theorem_rhs: report.theorem_rhs.unwrap_or(f64::NAN),
                        corollary_rhs: report.corollary_rhs.unwrap_or(f64::NAN),
                        max_grad_dual: report.max_grad_dual,
                        effective_iterations: report.effective_n,
                        satisfied: u8::from(report.satisfied == Some(true)),
                        diagnostic_only: u8::from(report.theorem_rhs.is_none()),
                    }
                };
                MdStatus::Ok
            }
            Err(e) => status_for(&e),
        }
    })
}

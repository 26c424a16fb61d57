//! C ABI for the Ornstein-Uhlenbeck inequality checks.
//!
//! Conventions:
//! - Handles (`OuEvaluator`, `OuFunction`, `OuGenerator`) are opaque. Create
//!   them with the `*_new` / `*_parse` constructors, release them with the
//!   matching `*_free`. The `*_free` functions accept NULL.
//! - Every fallible entry point returns an [`OuStatus`]. `OU_STATUS_OK` (0)
//!   means all out-parameters were written; on any other status they are
//!   left untouched and [`ou_last_error_message`] returns a NUL-terminated
//!   description. The message buffer is thread-local and stays valid until
//!   the same thread's next call into this library.
//! - Panics never unwind across the boundary; they surface as
//!   `OU_STATUS_PANIC`.
//! - Handles are immutable after construction, so sharing one `const`
//!   handle across threads is safe; freeing it while another thread uses it
//!   is not.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ou_hyper::cli::{parse_function, parse_generator};
use ou_hyper::error::OuError;
use ou_hyper::functions::{check_condition_c, check_condition_cprime, GeneratorC, GridSpec, TestFunction};
use ou_hyper::inequalities::{Direction, Evaluator, Verdict};

/// ABI revision reported by [`ou_abi_version`]; bumped on any breaking
/// change to this header.
pub const OU_ABI_VERSION: u32 = 1;

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OuStatus {
    /// Success; all out-parameters are valid.
    Ok = 0,
    /// A parameter was rejected: unknown name, bad range, wrong dimension.
    InvalidArgument = 1,
    /// An evaluation produced a non-finite value.
    NonFinite = 2,
    /// An iterative procedure stopped short of its target tolerance.
    NonConvergent = 3,
    /// A monotone inversion left the representable range.
    RangeError = 4,
    /// A required pointer argument was NULL.
    NullPointer = 5,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 6,
    /// The check panicked internally; inputs are unchanged but the run
    /// should be treated as failed.
    Panic = 7,
}

/// Which way a verdict's claim points.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OuDirection {
    /// The claim is lhs <= rhs.
    Leq = 0,
    /// The claim is lhs >= rhs.
    Geq = 1,
}

/// Numeric outcome of one inequality check.
///
/// `margin` is always `rhs - lhs`; `direction` says which sign means the
/// claim held (`Leq` wants it nonnegative, `Geq` nonpositive). `holds` is
/// that sign test with `slack` of numerical headroom already applied, and
/// `error_estimate <= slack` bounds the quadrature plus inversion error.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct OuVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
    pub error_estimate: f64,
    pub direction: OuDirection,
    pub holds: bool,
}

/// Opaque evaluator handle: one quadrature setup for a fixed dimension.
pub struct OuEvaluator {
    inner: Evaluator,
}

/// Opaque test-function handle.
pub struct OuFunction {
    inner: TestFunction,
}

/// Opaque generator handle (the `c` in the generalized inequalities).
pub struct OuGenerator {
    inner: GeneratorC,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct FfiError {
    status: OuStatus,
    message: String,
}

impl From<OuError> for FfiError {
    fn from(e: OuError) -> Self {
        let status = match &e {
            OuError::InvalidParam(_) | OuError::Io(_) | OuError::Json(_) => {
                OuStatus::InvalidArgument
            }
            OuError::NonFinite(_) => OuStatus::NonFinite,
            OuError::NonConvergent { .. } => OuStatus::NonConvergent,
            OuError::Range(_) => OuStatus::RangeError,
        };
        FfiError {
            status,
            message: e.to_string(),
        }
    }
}

fn null_pointer(what: &str) -> FfiError {
    FfiError {
        status: OuStatus::NullPointer,
        message: format!("{what} must not be NULL"),
    }
}

fn set_last_error(message: &str) {
    // NUL bytes cannot appear in our own messages, but never panic here.
    let owned = CString::new(message.replace('\0', "?"))
        .unwrap_or_else(|_| CString::new("error message unavailable").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

/// Runs `body` with panic containment and records the outcome in the
/// thread-local message buffer.
fn guard(body: impl FnOnce() -> Result<(), FfiError>) -> OuStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::default());
            OuStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(&e.message);
            e.status
        }
        Err(payload) => {
            let detail = payload
                .downcast_ref::<&str>()
                .map(|s| (*s).to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(&format!("internal panic: {detail}"));
            OuStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, FfiError> {
    ptr.as_ref().ok_or_else(|| null_pointer(what))
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, FfiError> {
    if ptr.is_null() {
        return Err(null_pointer(what));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| FfiError {
        status: OuStatus::InvalidUtf8,
        message: format!("{what} is not valid UTF-8"),
    })
}

unsafe fn write_out<T>(out: *mut T, what: &str, value: T) -> Result<(), FfiError> {
    if out.is_null() {
        return Err(null_pointer(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_verdict(v: &Verdict) -> OuVerdict {
    OuVerdict {
        lhs: v.lhs,
        rhs: v.rhs,
        margin: v.margin,
        slack: v.slack,
        error_estimate: v.error_estimate,
        direction: match v.direction {
            Direction::Leq => OuDirection::Leq,
            Direction::Geq => OuDirection::Geq,
        },
        holds: v.holds,
    }
}

/// Reports the ABI revision of the loaded library. Callers should check it
/// against the `OU_ABI_VERSION` they were compiled with.
#[no_mangle]
pub extern "C" fn ou_abi_version() -> u32 {
    OU_ABI_VERSION
}

/// Returns the calling thread's last error message as a NUL-terminated
/// string; empty after a successful call. Never NULL. The buffer is owned
/// by the library and is overwritten by the thread's next call.
#[no_mangle]
pub extern "C" fn ou_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an evaluator for dimension `dim` (1, 2, or 3) with the default
/// quadrature order for that dimension.
///
/// # Safety
/// `out` must be a valid pointer to an `OuEvaluator *`. On success it
/// receives a handle that must be released with [`ou_evaluator_free`].
#[no_mangle]
pub unsafe extern "C" fn ou_evaluator_new(dim: u32, out: *mut *mut OuEvaluator) -> OuStatus {
    guard(|| {
        let inner = Evaluator::new(dim as usize)?;
        let handle = Box::into_raw(Box::new(OuEvaluator { inner }));
        write_out(out, "out", handle)
    })
}

/// Creates an evaluator with an explicit one-dimensional quadrature order
/// (tensorized in higher dimension).
///
/// # Safety
/// Same contract as [`ou_evaluator_new`].
#[no_mangle]
pub unsafe extern "C" fn ou_evaluator_with_order(
    order: u32,
    dim: u32,
    out: *mut *mut OuEvaluator,
) -> OuStatus {
    guard(|| {
        let inner = Evaluator::with_order(order as usize, dim as usize)?;
        let handle = Box::into_raw(Box::new(OuEvaluator { inner }));
        write_out(out, "out", handle)
    })
}

/// Releases an evaluator handle; NULL is ignored.
///
/// # Safety
/// `ev` must be NULL or a handle returned by this library that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn ou_evaluator_free(ev: *mut OuEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// Parses a test-function spec such as `"exp_linear:lambda=0.5"` or
/// `"logistic:a=1,b=1"` for dimension `dim`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer to an
/// `OuFunction *`. On success `out` receives a handle to release with
/// [`ou_function_free`].
#[no_mangle]
pub unsafe extern "C" fn ou_function_parse(
    spec: *const c_char,
    dim: u32,
    out: *mut *mut OuFunction,
) -> OuStatus {
    guard(|| {
        let text = read_str(spec, "spec")?;
        let inner = parse_function(text, dim as usize)?;
        let handle: *mut OuFunction = Box::into_raw(Box::new(OuFunction { inner }));
        write_out(out, "out", handle)
    })
}

/// Releases a function handle; NULL is ignored.
///
/// # Safety
/// `f` must be NULL or a handle returned by this library that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn ou_function_free(f: *mut OuFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Parses a generator spec such as `"power:p=2"` or `"exm1:alpha=1,beta=1"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a valid pointer to an
/// `OuGenerator *`. On success `out` receives a handle to release with
/// [`ou_generator_free`].
#[no_mangle]
pub unsafe extern "C" fn ou_generator_parse(
    spec: *const c_char,
    out: *mut *mut OuGenerator,
) -> OuStatus {
    guard(|| {
        let text = read_str(spec, "spec")?;
        let inner = parse_generator(text)?;
        let handle: *mut OuGenerator = Box::into_raw(Box::new(OuGenerator { inner }));
        write_out(out, "out", handle)
    })
}

/// Releases a generator handle; NULL is ignored.
///
/// # Safety
/// `c` must be NULL or a handle returned by this library that has not
/// already been freed.
#[no_mangle]
pub unsafe extern "C" fn ou_generator_free(c: *mut OuGenerator) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Checks the contraction `||Q_t f||_q <= ||f||_p` at the critical exponent
/// `q = e^{2t}(p - 1) + 1`.
///
/// # Safety
/// `ev` and `f` must be live handles from this library and `out` a valid
/// pointer to an `OuVerdict`.
#[no_mangle]
pub unsafe extern "C" fn ou_check_hc(
    ev: *const OuEvaluator,
    f: *const OuFunction,
    p: f64,
    t: f64,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_hc(&f.inner, p, t)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the exponential variant `||exp(Q_t f)||_{e^{2t}} <= ||exp f||_1`.
///
/// # Safety
/// Same contract as [`ou_check_hc`].
#[no_mangle]
pub unsafe extern "C" fn ou_check_ehc(
    ev: *const OuEvaluator,
    f: *const OuFunction,
    t: f64,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_ehc(&f.inner, t)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the reverse contraction for positive f at reverse exponent
/// `e^{2t}(alpha + 1) - 1`.
///
/// # Safety
/// Same contract as [`ou_check_hc`].
#[no_mangle]
pub unsafe extern "C" fn ou_check_rhc(
    ev: *const OuEvaluator,
    f: *const OuFunction,
    alpha: f64,
    t: f64,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_rhc(&f.inner, alpha, t)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the logarithmic Sobolev inequality
/// `Ent(f^2) <= 2 E|grad f|^2`.
///
/// # Safety
/// Same contract as [`ou_check_hc`].
#[no_mangle]
pub unsafe extern "C" fn ou_check_lsi(
    ev: *const OuEvaluator,
    f: *const OuFunction,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_lsi(&f.inner)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the generalized forward inequality driven by generator `c`.
///
/// # Safety
/// `ev`, `c`, and `f` must be live handles from this library and `out` a
/// valid pointer to an `OuVerdict`.
#[no_mangle]
pub unsafe extern "C" fn ou_check_genhc(
    ev: *const OuEvaluator,
    c: *const OuGenerator,
    f: *const OuFunction,
    t: f64,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let c = deref(c, "c")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_genhc(&c.inner, &f.inner, t)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the generalized reverse inequality driven by generator `c`.
///
/// # Safety
/// Same contract as [`ou_check_genhc`].
#[no_mangle]
pub unsafe extern "C" fn ou_check_genrhc(
    ev: *const OuEvaluator,
    c: *const OuGenerator,
    f: *const OuFunction,
    t: f64,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let c = deref(c, "c")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_genrhc(&c.inner, &f.inner, t)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Checks the generalized entropy inequality driven by generator `c` (the
/// t -> 0 differential form of the generalized contraction).
///
/// # Safety
/// Same contract as [`ou_check_genhc`].
#[no_mangle]
pub unsafe extern "C" fn ou_check_glsi(
    ev: *const OuEvaluator,
    c: *const OuGenerator,
    f: *const OuFunction,
    out: *mut OuVerdict,
) -> OuStatus {
    guard(|| {
        let ev = deref(ev, "ev")?;
        let c = deref(c, "c")?;
        let f = deref(f, "f")?;
        let v = ev.inner.check_glsi(&c.inner, &f.inner)?;
        write_out(out, "out", to_c_verdict(&v))
    })
}

/// Runs both growth-condition checks for a generator on the default grid.
/// `c_passed` receives the forward condition's outcome, `cprime_passed` the
/// reverse condition's.
///
/// # Safety
/// `c` must be a live handle from this library; `c_passed` and
/// `cprime_passed` must be valid `bool` pointers.
#[no_mangle]
pub unsafe extern "C" fn ou_generator_conditions(
    c: *const OuGenerator,
    c_passed: *mut bool,
    cprime_passed: *mut bool,
) -> OuStatus {
    guard(|| {
        let c = deref(c, "c")?;
        let grid = GridSpec::default();
        let forward = check_condition_c(&c.inner, &grid)?.passed;
        let reverse = check_condition_cprime(&c.inner, &grid)?.passed;
        write_out(c_passed, "c_passed", forward)?;
        write_out(cprime_passed, "cprime_passed", reverse)
    })
}

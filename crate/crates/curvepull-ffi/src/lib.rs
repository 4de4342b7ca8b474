//! C interface to the cusp pullback engine.
//!
//! Every call returns a [`CpStatus`]. On failure a message is kept per thread
//! and can be read with [`cp_last_error`]. Strings handed out by the library
//! must be released with [`cp_string_free`], evaluators with
//! [`cp_evaluator_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use curvepull::cli::{CliError, MapSpecFile, MAX_HEIGHT};
use curvepull::exact_farey::cusp_normalize;
use curvepull::pullback::{build_evaluator, CuspFate, CuspSettings, SigmaEvaluator};
use num_complex::Complex64;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    NotPcf = 4,
    Precondition = 5,
    /// The engine could not decide within its depth budget.
    Undecided = 6,
    /// An exact result does not fit the 64-bit output.
    Overflow = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CpFateKind {
    Peripheral = 0,
    Essential = 1,
    Undecided = 2,
}

/// Opaque handle around a built σ evaluator.
pub struct CpEvaluator {
    inner: SigmaEvaluator,
}

struct Fail(CpStatus, String);

impl From<CliError> for Fail {
    fn from(e: CliError) -> Fail {
        let s = match e {
            CliError::Parse(_) => CpStatus::Parse,
            CliError::NotPcf(_) => CpStatus::NotPcf,
            CliError::Io(_) => CpStatus::Internal,
            _ => CpStatus::Precondition,
        };
        Fail(s, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> CpStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CpStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CpStatus::Internal
        }
    }
}

fn null() -> Fail {
    Fail(CpStatus::NullArgument, "null pointer argument".into())
}

unsafe fn evaluator<'a>(ev: *const CpEvaluator) -> Result<&'a SigmaEvaluator, Fail> {
    ev.as_ref().map(|e| &e.inner).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn cusp(p: i64, q: i64) -> Result<curvepull::exact_farey::Cusp, Fail> {
    cusp_normalize(p, q).map_err(|e| Fail(CpStatus::Precondition, e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn cp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Build an evaluator from a map spec in JSON (the CLI `--spec` format).
///
/// # Safety
/// `spec_json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_from_spec(spec_json: *const c_char, out: *mut *mut CpEvaluator) -> CpStatus {
    guard(|| {
        if spec_json.is_null() || out.is_null() {
            return Err(null());
        }
        out.write(ptr::null_mut());
        let text = CStr::from_ptr(spec_json)
            .to_str()
            .map_err(|e| Fail(CpStatus::InvalidUtf8, e.to_string()))?;
        let spec = MapSpecFile::load(text)?;
        let mut settings = CuspSettings::default();
        if let Some(t) = spec.file.t_value()? {
            settings.t = t.to_f64().unwrap_or(f64::NAN);
        }
        if let Some(d) = spec.file.settings.depth {
            settings.depth = d;
        }
        check_settings(settings)?;
        let inner = build_evaluator(&spec.f, &spec.marked).map_err(CliError::from)?.with_settings(settings);
        out.write(Box::into_raw(Box::new(CpEvaluator { inner })));
        Ok(())
    })
}

fn check_settings(s: CuspSettings) -> Result<(), Fail> {
    if !(s.t > 0.0 && s.t <= 1.0) {
        return Err(Fail(CpStatus::Precondition, format!("t = {} must lie in (0, 1]", s.t)));
    }
    if !(4..=40).contains(&s.depth) {
        return Err(Fail(CpStatus::Precondition, format!("depth {} must lie in 4..=40", s.depth)));
    }
    Ok(())
}

/// # Safety
/// `ev` must come from [`cp_evaluator_from_spec`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_free(ev: *mut CpEvaluator) {
    if !ev.is_null() {
        drop(Box::from_raw(ev));
    }
}

/// Horoball size `t` in (0, 1] and approach depth in 4..=40.
///
/// # Safety
/// `ev` must be a live evaluator.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_set_settings(ev: *mut CpEvaluator, t: f64, depth: u32) -> CpStatus {
    guard(|| {
        let ev = ev.as_mut().ok_or_else(null)?;
        let s = CuspSettings { t, depth: depth as usize };
        check_settings(s)?;
        ev.inner.settings = s;
        Ok(())
    })
}

/// Degree of the map actually pulled back.
///
/// # Safety
/// `ev` must be a live evaluator and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_degree(ev: *const CpEvaluator, out: *mut u32) -> CpStatus {
    guard(|| write(out, evaluator(ev)?.degree() as u32))
}

/// Whether σ is constant for this marking.
///
/// # Safety
/// `ev` must be a live evaluator and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_is_constant(ev: *const CpEvaluator, out: *mut bool) -> CpStatus {
    guard(|| write(out, evaluator(ev)?.constant))
}

/// The fixed point of σ.
///
/// # Safety
/// `ev` must be a live evaluator, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cp_evaluator_tau0(ev: *const CpEvaluator, re: *mut f64, im: *mut f64) -> CpStatus {
    guard(|| {
        let z = evaluator(ev)?.tau0;
        write(re, z.re)?;
        write(im, z.im)
    })
}

/// σ(τ) for a point of the upper half plane.
///
/// # Safety
/// `ev` must be a live evaluator, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cp_sigma_eval(ev: *const CpEvaluator, re: f64, im: f64, out_re: *mut f64, out_im: *mut f64) -> CpStatus {
    guard(|| {
        let ev = evaluator(ev)?;
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Fail(CpStatus::Precondition, format!("{re} + {im}i is not in the upper half plane")));
        }
        let w = ev.sigma_eval(Complex64::new(re, im)).map_err(CliError::from)?;
        write(out_re, w.re)?;
        write(out_im, w.im)
    })
}

/// Fate of the cusp `p/q` (`1/0` is infinity). For an essential fate the
/// target cusp is written to `out_p/out_q`, otherwise they are left alone.
///
/// # Safety
/// `ev` must be a live evaluator, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cp_cusp_fate(
    ev: *const CpEvaluator,
    p: i64,
    q: i64,
    out_kind: *mut CpFateKind,
    out_p: *mut i64,
    out_q: *mut i64,
) -> CpStatus {
    guard(|| {
        let ev = evaluator(ev)?;
        if out_kind.is_null() || out_p.is_null() || out_q.is_null() {
            return Err(null());
        }
        match ev.fate(cusp(p, q)?) {
            CuspFate::Essential(c) => {
                write(out_kind, CpFateKind::Essential)?;
                write(out_p, c.p())?;
                write(out_q, c.q())
            }
            CuspFate::Peripheral => write(out_kind, CpFateKind::Peripheral),
            CuspFate::Undecided(_) => write(out_kind, CpFateKind::Undecided),
        }
    })
}

/// Exact multiplier of an essential cusp, as a reduced fraction.
///
/// # Safety
/// `ev` must be a live evaluator, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn cp_cusp_multiplier(ev: *const CpEvaluator, p: i64, q: i64, out_num: *mut i64, out_den: *mut i64) -> CpStatus {
    guard(|| {
        let ev = evaluator(ev)?;
        let r = cusp(p, q)?;
        let m = ev
            .multiplier_from_horoballs(r)
            .map_err(|e| Fail(CpStatus::Undecided, e.to_string()))?;
        let (n, d) = match (m.numer().to_i64(), m.denom().to_i64()) {
            (Some(n), Some(d)) => (n, d),
            _ => return Err(Fail(CpStatus::Overflow, format!("multiplier {m} exceeds 64 bits"))),
        };
        write(out_num, n)?;
        write(out_den, d)
    })
}

/// Attractor search over cusps of height at most `height`, as a JSON string
/// owned by the caller.
///
/// # Safety
/// `ev` must be a live evaluator and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cp_attractor_json(ev: *const CpEvaluator, height: i64, max_iter: u32, out: *mut *mut c_char) -> CpStatus {
    guard(|| {
        let ev = evaluator(ev)?;
        if out.is_null() {
            return Err(null());
        }
        out.write(ptr::null_mut());
        if !(0..=MAX_HEIGHT).contains(&height) {
            return Err(Fail(CpStatus::Precondition, format!("height {height} must lie in 0..={MAX_HEIGHT}")));
        }
        let rep = ev.find_attractor(height, max_iter as usize);
        let s = serde_json::to_string_pretty(&rep).map_err(|e| Fail(CpStatus::Internal, e.to_string()))?;
        out.write(CString::new(s).expect("json has no nul").into_raw());
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

//! C ABI for the ksupport library.
//!
//! Objects are opaque handles created by `ksp_*_new` (or a solve call) and
//! released by the matching `ksp_*_free`. Every fallible function returns a
//! `KspStatus`; on failure `ksp_last_error` describes the error on the
//! calling thread. Panics are caught at the boundary and reported as
//! `KSP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ksupport::faces::exposed_face_sp;
use ksupport::norms::{ksupport_norm, top_norm, NormSpec};
use ksupport::solver::{solve_penalized, QuadraticObjective, SolveOptions, SolveReport};
use ksupport::sparse::Tolerance;
use ksupport::Error;

/// Result codes. Values match the command-line exit codes where they
/// overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    NonConvergence = 3,
    Panic = 5,
}

/// Norm parameters (p, k).
pub struct KspSpec {
    spec: NormSpec,
}

/// Vertices of an exposed face of the unit k-support ball.
pub struct KspFace {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

/// Outcome of a solve.
pub struct KspSolveReport {
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(e: Error) -> KspStatus {
    set_error(&e.to_string());
    match e {
        Error::NonConvergence { .. } => KspStatus::NonConvergence,
        _ => KspStatus::InvalidInput,
    }
}

fn null(name: &str) -> KspStatus {
    set_error(&format!("{name} is null"));
    KspStatus::NullPointer
}

/// Runs `f`, converting panics into `KspStatus::Panic`.
fn guarded(f: impl FnOnce() -> KspStatus) -> KspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            KspStatus::Panic
        }
    }
}

/// Borrows `len` doubles; a zero length yields an empty slice.
unsafe fn slice<'a>(p: *const f64, len: usize) -> Option<&'a [f64]> {
    if len == 0 {
        Some(&[])
    } else if p.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(p, len))
    }
}

/// Message of the last failure on this thread, valid until the next call
/// into the library from the same thread. Empty when there was none.
#[no_mangle]
pub extern "C" fn ksp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a spec handle. `p` may be `INFINITY`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_spec_new(p: f64, k: usize, out: *mut *mut KspSpec) -> KspStatus {
    guarded(|| {
        if out.is_null() {
            return null("out");
        }
        match NormSpec::new(p, k) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(KspSpec { spec }));
                KspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `spec` must come from `ksp_spec_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ksp_spec_free(spec: *mut KspSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Top-(q, k) norm of y, q being the conjugate of the spec's p.
///
/// # Safety
/// `spec` must be a live handle, `y` must point to `d` doubles and `out` to
/// one writable double.
#[no_mangle]
pub unsafe extern "C" fn ksp_top_norm(spec: *const KspSpec, y: *const f64, d: usize, out: *mut f64) -> KspStatus {
    guarded(|| {
        let (Some(spec), Some(y)) = (spec.as_ref(), slice(y, d)) else {
            return null("spec or y");
        };
        if out.is_null() {
            return null("out");
        }
        match top_norm(y, &spec.spec) {
            Ok(v) => {
                *out = v;
                KspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// k-support norm of x, certified to within `tol` (absolute and relative).
/// `gap` may be null; otherwise it receives the certified gap.
///
/// # Safety
/// `spec` must be a live handle, `x` must point to `d` doubles and `out` to
/// one writable double.
#[no_mangle]
pub unsafe extern "C" fn ksp_ksupport_norm(
    spec: *const KspSpec,
    x: *const f64,
    d: usize,
    tol: f64,
    out: *mut f64,
    gap: *mut f64,
) -> KspStatus {
    guarded(|| {
        let (Some(spec), Some(x)) = (spec.as_ref(), slice(x, d)) else {
            return null("spec or x");
        };
        if out.is_null() {
            return null("out");
        }
        let tol = match Tolerance::new(tol, tol) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match ksupport_norm(x, &spec.spec, tol) {
            Ok(r) => {
                *out = r.value;
                if !gap.is_null() {
                    *gap = r.certified_gap;
                }
                KspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Face of the unit k-support ball exposed by y; ties in |y_i| within
/// `tol` are merged.
///
/// # Safety
/// `spec` must be a live handle, `y` must point to `d` doubles and `out` to
/// writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_face_new(
    spec: *const KspSpec,
    y: *const f64,
    d: usize,
    tol: f64,
    out: *mut *mut KspFace,
) -> KspStatus {
    guarded(|| {
        let (Some(spec), Some(y)) = (spec.as_ref(), slice(y, d)) else {
            return null("spec or y");
        };
        if out.is_null() {
            return null("out");
        }
        let tol = match Tolerance::new(tol, 0.0) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        match exposed_face_sp(y, &spec.spec, tol) {
            Ok(f) => {
                let vertices = f.vertices.iter().map(|v| v.as_slice().to_vec()).collect();
                *out = Box::into_raw(Box::new(KspFace { dim: d, vertices }));
                KspStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Number of vertices of the face; 0 for a null handle.
///
/// # Safety
/// `face` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_face_vertex_count(face: *const KspFace) -> usize {
    face.as_ref().map_or(0, |f| f.vertices.len())
}

/// Copies vertex `i` into `out`, which must hold the dimension d.
///
/// # Safety
/// `face` must be a live handle and `out` must point to d writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ksp_face_vertex(face: *const KspFace, i: usize, out: *mut f64) -> KspStatus {
    guarded(|| {
        let Some(f) = face.as_ref() else {
            return null("face");
        };
        if out.is_null() {
            return null("out");
        }
        let Some(v) = f.vertices.get(i) else {
            return fail(Error::IndexOutOfRange {
                index: i,
                d: f.vertices.len(),
            });
        };
        std::slice::from_raw_parts_mut(out, f.dim).copy_from_slice(v);
        KspStatus::Ok
    })
}

/// # Safety
/// `face` must come from `ksp_face_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ksp_face_free(face: *mut KspFace) {
    if !face.is_null() {
        drop(Box::from_raw(face));
    }
}

/// Minimizes ½‖Ax − b‖² + γ‖x‖^sp. `a` is row-major with `m` rows and `d`
/// columns, or null for A = I (then m must equal d). The report handle is
/// written even on `KSP_STATUS_NON_CONVERGENCE`.
///
/// # Safety
/// `spec` must be a live handle; `a` must be null or point to m·d doubles;
/// `b` must point to m doubles; `out` must point to writable storage for
/// one handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_solve_quadratic(
    spec: *const KspSpec,
    a: *const f64,
    m: usize,
    d: usize,
    b: *const f64,
    gamma: f64,
    tol: f64,
    max_iterations: usize,
    out: *mut *mut KspSolveReport,
) -> KspStatus {
    guarded(|| {
        let (Some(spec), Some(b)) = (spec.as_ref(), slice(b, m)) else {
            return null("spec or b");
        };
        if out.is_null() {
            return null("out");
        }
        let rows = if a.is_null() {
            if m != d {
                return fail(Error::DimensionMismatch { expected: d, got: m });
            }
            None
        } else {
            let flat = std::slice::from_raw_parts(a, m * d);
            Some(flat.chunks(d.max(1)).map(<[f64]>::to_vec).collect())
        };
        let obj = match QuadraticObjective::new(rows, b.to_vec()) {
            Ok(o) => o,
            Err(e) => return fail(e),
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return fail(Error::InvalidTolerance);
        }
        let opts = SolveOptions {
            tol,
            max_iterations,
            ..SolveOptions::default()
        };
        match solve_penalized(&obj, gamma, &spec.spec, &opts) {
            Ok(report) => {
                let converged = report.converged;
                let gap = report.fw_gap;
                let iterations = report.iterations;
                *out = Box::into_raw(Box::new(KspSolveReport { report }));
                if converged {
                    KspStatus::Ok
                } else {
                    fail(Error::NonConvergence {
                        what: "conditional gradient",
                        iterations,
                        gap,
                    })
                }
            }
            Err(e) => fail(e),
        }
    })
}

/// Dimension of the solution; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_dim(report: *const KspSolveReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.x_star.dim())
}

/// Copies the solution into `out`, which must hold `ksp_report_dim` doubles.
///
/// # Safety
/// `report` must be a live handle and `out` must point to enough writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_solution(report: *const KspSolveReport, out: *mut f64) -> KspStatus {
    guarded(|| {
        let Some(r) = report.as_ref() else {
            return null("report");
        };
        if out.is_null() {
            return null("out");
        }
        let x = r.report.x_star.as_slice();
        std::slice::from_raw_parts_mut(out, x.len()).copy_from_slice(x);
        KspStatus::Ok
    })
}

/// Certified gap at the returned point; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_gap(report: *const KspSolveReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.fw_gap)
}

/// Objective value at the returned point; NaN for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_objective(report: *const KspSolveReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.report.objective)
}

/// Iterations performed; 0 for a null handle.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_iterations(report: *const KspSolveReport) -> usize {
    report.as_ref().map_or(0, |r| r.report.iterations)
}

/// Writes the 0-based indices of the support bound (the union of optimal
/// supports of the final gradient) into `out` if non-null and returns their
/// count. Call with a null `out` to size the buffer.
///
/// # Safety
/// `report` must be null or a live handle; `out` must be null or point to
/// enough writable entries.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_support_bound(report: *const KspSolveReport, out: *mut usize) -> usize {
    let Some(r) = report.as_ref() else {
        return 0;
    };
    let idx = r.report.support_bound.indices();
    if !out.is_null() {
        std::slice::from_raw_parts_mut(out, idx.len()).copy_from_slice(idx);
    }
    idx.len()
}

/// # Safety
/// `report` must come from `ksp_solve_quadratic` and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn ksp_report_free(report: *mut KspSolveReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ksp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}


//! C interface to `spinhodo`.
//!
//! Every function returns a [`SpinhodoStatus`]; on failure the message is
//! available from [`spinhodo_last_error`] on the same thread. Panics are
//! caught at the boundary and reported as `SPINHODO_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use spinhodo::cli::{self, PresetName, RunOutput};
use spinhodo::elliptic::{self, EllipticModulus};
use spinhodo::integrator::IntegratorConfig;
use spinhodo::qubit::{analytic_rabi_general, InitialAngles};
use spinhodo::qutrit::analytic_qutrit_resonance;
use spinhodo::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinhodoStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Divergence = 3,
    Integration = 4,
    InvalidArgument = 5,
    Unsupported = 6,
    Io = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> SpinhodoStatus {
    match err {
        Error::Domain(_) => SpinhodoStatus::Domain,
        Error::Divergence(_) => SpinhodoStatus::Divergence,
        Error::Integration { .. } => SpinhodoStatus::Integration,
        Error::InvalidArgument(_) => SpinhodoStatus::InvalidArgument,
        Error::Unsupported(_) => SpinhodoStatus::Unsupported,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => SpinhodoStatus::Io,
    }
}

struct Fail(SpinhodoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SpinhodoStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SpinhodoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpinhodoStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SpinhodoStatus::Panic
        }
    }
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        Fail(
            SpinhodoStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn spinhodo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn spinhodo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Jacobi `sn`, `cn`, `dn` at `u` for modulus `k` in [0, 1].
///
/// # Safety
/// `sn`, `cn` and `dn` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_sncndn(
    u: f64,
    k: f64,
    sn: *mut f64,
    cn: *mut f64,
    dn: *mut f64,
) -> SpinhodoStatus {
    guard(|| {
        let j = elliptic::jacobi_sncndn(u, EllipticModulus::new(k)?)?;
        write(sn, j.sn, "sn")?;
        write(cn, j.cn, "cn")?;
        write(dn, j.dn, "dn")
    })
}

/// Complete elliptic integral of the first kind `K(k)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_complete_k(k: f64, out: *mut f64) -> SpinhodoStatus {
    guard(|| write(out, elliptic::complete_k(EllipticModulus::new(k)?)?, "out"))
}

/// Complete elliptic integral of the second kind `E(m)`, `m <= 1`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_complete_e(m: f64, out: *mut f64) -> SpinhodoStatus {
    guard(|| write(out, elliptic::complete_e(m)?, "out"))
}

/// Incomplete elliptic integral of the second kind `E(phi | m)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_incomplete_e(phi: f64, m: f64, out: *mut f64) -> SpinhodoStatus {
    guard(|| write(out, elliptic::incomplete_e(phi, m)?, "out"))
}

/// Closed-form Bloch vector in a circular field with uniform decay `gamma`,
/// starting from the pure state at angles `theta0`, `phi0`.
///
/// # Safety
/// `out` must point to three writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_rabi_general(
    t: f64,
    theta0: f64,
    phi0: f64,
    h: f64,
    big_h: f64,
    omega: f64,
    gamma: f64,
    out: *mut f64,
) -> SpinhodoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let ang = InitialAngles::new(theta0, phi0)?;
        let r = analytic_rabi_general(t, ang, h, big_h, omega, gamma).r;
        ptr::copy_nonoverlapping(r.as_ptr(), out, 3);
        Ok(())
    })
}

/// Closed-form eight-component qutrit vector at resonance with `d = 0`.
///
/// # Safety
/// `out` must point to eight writable doubles.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_qutrit_resonance(
    t: f64,
    h: f64,
    q: f64,
    omega: f64,
    out: *mut f64,
) -> SpinhodoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if ![t, h, q, omega].iter().all(|v| v.is_finite()) {
            return Err(Fail(
                SpinhodoStatus::Domain,
                "arguments must be finite".into(),
            ));
        }
        let v = analytic_qutrit_resonance(t, h, q, omega).q;
        ptr::copy_nonoverlapping(v.as_ptr(), out, 8);
        Ok(())
    })
}

/// A finished preset run.
pub struct SpinhodoRun {
    output: RunOutput,
}

/// One sample of a run: state direction plus hodograph geometry.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SpinhodoSample {
    pub t: f64,
    pub p: [f64; 3],
    pub probability: f64,
    pub energy: f64,
    pub speed: f64,
    pub curvature: f64,
    pub torsion: f64,
    pub arc_length: f64,
}

/// Runs the named preset (`"fig1"` .. `"fig10"`). A positive `rel_tol`
/// overrides the integrator tolerance. The result must be released with
/// [`spinhodo_run_free`].
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_preset(
    name: *const c_char,
    rel_tol: f64,
    out: *mut *mut SpinhodoRun,
) -> SpinhodoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name: PresetName = read_str(name, "name")?.parse()?;
        let cfg = if rel_tol > 0.0 {
            let cfg = IntegratorConfig::default().with_tolerance(rel_tol);
            cfg.validate()?;
            cfg
        } else {
            IntegratorConfig::default()
        };
        let output = cli::evaluate_preset(name, &cfg)?;
        out.write(Box::into_raw(Box::new(SpinhodoRun { output })));
        Ok(())
    })
}

/// Number of samples in `run`, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle from [`spinhodo_run_preset`].
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_len(run: *const SpinhodoRun) -> usize {
    run.as_ref().map_or(0, |r| r.output.rows.len())
}

/// Copies sample `index` of `run` into `out`.
///
/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_sample(
    run: *const SpinhodoRun,
    index: usize,
    out: *mut SpinhodoSample,
) -> SpinhodoStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let (row, g) = run
            .output
            .rows
            .get(index)
            .zip(run.output.geometry.get(index))
            .ok_or_else(|| {
                Fail(
                    SpinhodoStatus::InvalidArgument,
                    format!("index {index} out of range"),
                )
            })?;
        let sample = SpinhodoSample {
            t: row.t,
            p: row.p,
            probability: row.probability,
            energy: row.energy,
            speed: g.speed,
            curvature: g.curvature,
            torsion: g.torsion,
            arc_length: g.arc_length,
        };
        write(out, sample, "out")
    })
}

/// The run report as JSON. Release the string with [`spinhodo_string_free`].
///
/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_report_json(
    run: *const SpinhodoRun,
    out: *mut *mut c_char,
) -> SpinhodoStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let json = serde_json::to_string_pretty(&run.output.report).map_err(Error::from)?;
        let c = CString::new(json).map_err(|e| Fail(SpinhodoStatus::Io, e.to_string()))?;
        write(out, c.into_raw(), "out")
    })
}

/// Writes trajectory.csv, geometry.csv, report.json and plot.gp into `dir`.
///
/// # Safety
/// `run` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_write_artifacts(
    run: *const SpinhodoRun,
    dir: *const c_char,
) -> SpinhodoStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let dir = read_str(dir, "dir")?;
        cli::write_artifacts(&run.output, Path::new(dir))?;
        Ok(())
    })
}

/// Releases a run handle. Null is ignored.
///
/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_run_free(run: *mut SpinhodoRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn spinhodo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

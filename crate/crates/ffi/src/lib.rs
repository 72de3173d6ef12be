//! C interface to `spiked-spectra`.
//!
//! Every fallible function returns an [`SsStatus`] and writes its result
//! through an out pointer. On failure the message is available from
//! [`ss_last_error`] on the same thread. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use spiked_spectra::cli::{mc_spike_replicas, Model};
use spiked_spectra::laws::{build, LawSpec};
use spiked_spectra::measures::{MeasureCircle, MeasureLine};
use spiked_spectra::oprl::{lanczos, JacobiCoeffs};
use spiked_spectra::opuc::{gw_alpha, schur_verblunsky, VerblunskyCoeffs};
use spiked_spectra::rates::{self, RateArg, SpikedModel};
use spiked_spectra::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    Domain = 1,
    Validation = 2,
    Accuracy = 3,
    Numerical = 4,
    NotMomentSequence = 5,
    SingularPoint = 6,
    CostGuard = 7,
    Io = 8,
    NullPointer = 9,
    OutOfRange = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsLineLaw {
    Semicircle = 0,
    MarchenkoPastur = 1,
    SpikedSemicircle = 2,
    SpikedMarchenkoPastur = 3,
    Meixner = 4,
    MeixnerNormalized = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsModel {
    Hermite = 0,
    Laguerre = 1,
}

pub struct SsLineMeasure(MeasureLine);

pub struct SsCircleMeasure(MeasureCircle);

pub struct SsJacobi(JacobiCoeffs);

pub struct SsVerblunsky(VerblunskyCoeffs);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SsStatus {
    match e {
        Error::Domain(_) => SsStatus::Domain,
        Error::Validation(_) => SsStatus::Validation,
        Error::Accuracy { .. } => SsStatus::Accuracy,
        Error::Numerical(_) => SsStatus::Numerical,
        Error::NotMomentSequence { .. } => SsStatus::NotMomentSequence,
        Error::SingularPoint(_) => SsStatus::SingularPoint,
        Error::CostGuard(_) => SsStatus::CostGuard,
        Error::Io(_) => SsStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Range(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SsStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            SsStatus::NullPointer
        }
        Ok(Err(Fail::Range(msg))) => {
            set_error(msg);
            SsStatus::OutOfRange
        }
        Err(_) => {
            set_error("internal panic".into());
            SsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(p: *mut T, what: &'static str, value: T) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    p.write(value);
    Ok(())
}

fn index(i: usize, len: usize) -> Result<(), Fail> {
    if i >= len {
        return Err(Fail::Range(format!(
            "index {i} out of range for length {len}"
        )));
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ss_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a limit law on the line. Parameters not used by `law` are ignored:
/// spiked semicircle reads `p1 = θ`; Marchenko-Pastur reads `p1 = τ`; spiked
/// Marchenko-Pastur reads `p1 = τ, p2 = θ`; Meixner laws read `p1 = b, p2 = c`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_line_law_new(
    law: SsLineLaw,
    p1: f64,
    p2: f64,
    out: *mut *mut SsLineMeasure,
) -> SsStatus {
    guard(|| {
        let spec = match law {
            SsLineLaw::Semicircle => LawSpec::Sc,
            SsLineLaw::MarchenkoPastur => LawSpec::Mp { tau: p1 },
            SsLineLaw::SpikedSemicircle => LawSpec::SpikedSc { theta: p1 },
            SsLineLaw::SpikedMarchenkoPastur => LawSpec::SpikedMp { tau: p1, theta: p2 },
            SsLineLaw::Meixner => LawSpec::Meixner { b: p1, c: p2 },
            SsLineLaw::MeixnerNormalized => LawSpec::MeixnerNormalized { b: p1, c: p2 },
        };
        let mu = build(spec)?.line()?;
        write(out, "out", Box::into_raw(Box::new(SsLineMeasure(mu))))
    })
}

/// # Safety
/// `mu` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ss_line_free(mu: *mut SsLineMeasure) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_line_total_mass(mu: *const SsLineMeasure, out: *mut f64) -> SsStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.total_mass()))
}

/// Absolutely continuous density at `x`.
///
/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_line_density(
    mu: *const SsLineMeasure,
    x: f64,
    out: *mut f64,
) -> SsStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.density_at(x)))
}

/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_line_atom_count(mu: *const SsLineMeasure, out: *mut usize) -> SsStatus {
    guard(|| write(out, "out", deref(mu, "mu")?.0.atoms().len()))
}

/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_line_atom(
    mu: *const SsLineMeasure,
    i: usize,
    location: *mut f64,
    mass: *mut f64,
) -> SsStatus {
    guard(|| {
        let atoms = deref(mu, "mu")?.0.atoms();
        index(i, atoms.len())?;
        write(location, "location", atoms[i].location)?;
        write(mass, "mass", atoms[i].mass)
    })
}

/// Jacobi coefficients `b_0..b_{m-1}`, `a_0..a_{m-2}` by the Lanczos
/// procedure on an `nodes`-point discretization of `mu`.
///
/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_line_jacobi(
    mu: *const SsLineMeasure,
    nodes: usize,
    m: usize,
    out: *mut *mut SsJacobi,
) -> SsStatus {
    guard(|| {
        let q = deref(mu, "mu")?.0.discretize(nodes)?;
        let j = lanczos(&q, m)?;
        write(out, "out", Box::into_raw(Box::new(SsJacobi(j))))
    })
}

/// # Safety
/// `j` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ss_jacobi_free(j: *mut SsJacobi) {
    if !j.is_null() {
        drop(Box::from_raw(j));
    }
}

/// Number of stored `b` coefficients; there is one fewer `a`.
///
/// # Safety
/// Pointers must be valid; `j` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_jacobi_len(j: *const SsJacobi, out: *mut usize) -> SsStatus {
    guard(|| write(out, "out", deref(j, "j")?.0.b().len()))
}

/// # Safety
/// Pointers must be valid; `j` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_jacobi_b(j: *const SsJacobi, k: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let b = deref(j, "j")?.0.b();
        index(k, b.len())?;
        write(out, "out", b[k])
    })
}

/// # Safety
/// Pointers must be valid; `j` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_jacobi_a(j: *const SsJacobi, k: usize, out: *mut f64) -> SsStatus {
    guard(|| {
        let a = deref(j, "j")?.0.a();
        index(k, a.len())?;
        write(out, "out", a[k])
    })
}

/// Gross-Witten law for `|g| <= 1`, or its Aleksandrov rotation by `phi`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ss_gw_law_new(
    g: f64,
    phi: f64,
    out: *mut *mut SsCircleMeasure,
) -> SsStatus {
    guard(|| {
        let mu = build(LawSpec::SpikedGw { g, phi })?.circle()?;
        write(out, "out", Box::into_raw(Box::new(SsCircleMeasure(mu))))
    })
}

/// # Safety
/// `mu` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ss_circle_free(mu: *mut SsCircleMeasure) {
    if !mu.is_null() {
        drop(Box::from_raw(mu));
    }
}

/// Trigonometric moments `c_1..c_k`, written to `re[0..k]` and `im[0..k]`.
///
/// # Safety
/// `re` and `im` must hold `k` doubles; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_circle_moments(
    mu: *const SsCircleMeasure,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> SsStatus {
    guard(|| {
        let c = deref(mu, "mu")?.0.moments(k)?;
        if re.is_null() || im.is_null() {
            return Err(Fail::Null("re/im"));
        }
        for (i, z) in c.iter().enumerate() {
            re.add(i).write(z.re);
            im.add(i).write(z.im);
        }
        Ok(())
    })
}

/// Closed-form Gross-Witten Verblunsky coefficient `α_n`.
///
/// # Safety
/// `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ss_gw_alpha(g: f64, n: usize, re: *mut f64, im: *mut f64) -> SsStatus {
    guard(|| {
        let a = gw_alpha(g, n)?;
        write(re, "re", a.re)?;
        write(im, "im", a.im)
    })
}

/// Schur algorithm on moments `c_1..c_len`.
///
/// # Safety
/// `re` and `im` must hold `len` doubles; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ss_schur_verblunsky(
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut SsVerblunsky,
) -> SsStatus {
    guard(|| {
        if len > 0 && (re.is_null() || im.is_null()) {
            return Err(Fail::Null("re/im"));
        }
        let c: Vec<Complex64> = (0..len)
            .map(|i| Complex64::new(*re.add(i), *im.add(i)))
            .collect();
        let alpha = schur_verblunsky(&c)?;
        write(out, "out", Box::into_raw(Box::new(SsVerblunsky(alpha))))
    })
}

/// # Safety
/// `v` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ss_verblunsky_free(v: *mut SsVerblunsky) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// # Safety
/// Pointers must be valid; `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_verblunsky_len(v: *const SsVerblunsky, out: *mut usize) -> SsStatus {
    guard(|| write(out, "out", deref(v, "v")?.0.len()))
}

/// # Safety
/// Pointers must be valid; `v` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_verblunsky_get(
    v: *const SsVerblunsky,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> SsStatus {
    guard(|| {
        let a = deref(v, "v")?.0.alpha();
        index(k, a.len())?;
        write(re, "re", a[k].re)?;
        write(im, "im", a[k].im)
    })
}

/// Spiked rate function on the line: Hermite reads `theta`, Laguerre reads
/// `tau` and `theta`.
///
/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_rate_spiked_line(
    model: SsModel,
    tau: f64,
    theta: f64,
    mu: *const SsLineMeasure,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let m = match model {
            SsModel::Hermite => SpikedModel::Hermite { theta },
            SsModel::Laguerre => SpikedModel::Laguerre { tau, theta },
        };
        let r = rates::rate_spiked(m, RateArg::Line(&deref(mu, "mu")?.0))?;
        write(out, "out", r)
    })
}

/// Spiked Gross-Witten rate function.
///
/// # Safety
/// Pointers must be valid; `mu` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ss_rate_spiked_gw(
    g: f64,
    phi: f64,
    mu: *const SsCircleMeasure,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let r = rates::rate_spiked(
            SpikedModel::Gw { g, phi },
            RateArg::Circle(&deref(mu, "mu")?.0),
        )?;
        write(out, "out", r)
    })
}

/// Reversed relative entropy `K(reference | mu)` on the line.
///
/// # Safety
/// Pointers must be valid; both measures must be live handles.
#[no_mangle]
pub unsafe extern "C" fn ss_reversed_kl_line(
    reference: *const SsLineMeasure,
    mu: *const SsLineMeasure,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        let k = rates::reversed_kl_line(&deref(reference, "reference")?.0, &deref(mu, "mu")?.0)?;
        write(out, "out", k)
    })
}

/// Hermite effective potential; infinite inside `(-2, 2)`.
#[no_mangle]
pub extern "C" fn ss_f_hermite(x: f64) -> f64 {
    rates::f_hermite(x)
}

/// Spiked ensemble replicas. Replica `i` writes `(top eigenvalue, top weight,
/// m_1)` to `out[3i..3i+3]`; `tau` is ignored for the Hermite model.
///
/// # Safety
/// `out` must hold `3 * replicas` doubles.
#[no_mangle]
pub unsafe extern "C" fn ss_mc_spike(
    model: SsModel,
    n: usize,
    theta: f64,
    tau: f64,
    seed: u64,
    replicas: usize,
    out: *mut f64,
) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let m = match model {
            SsModel::Hermite => Model::Hermite,
            SsModel::Laguerre => Model::Laguerre,
        };
        let rows = mc_spike_replicas(m, n, theta, tau, seed, replicas)?;
        for (i, r) in rows.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                out.add(3 * i + j).write(*x);
            }
        }
        Ok(())
    })
}

//! C ABI over the `vocdm` library.
//!
//! Conventions:
//!
//! * Every fallible call returns a [`VocdmStatus`]; results go through out
//!   pointers which are left untouched on failure.
//! * Complex arrays are interleaved `double` pairs `(re, im)`; lengths are
//!   counted in complex entries.
//! * After a failure, [`vocdm_last_error`] returns a message for the calling
//!   thread. The pointer stays valid until the next failing call on that
//!   thread.
//! * Panics never cross the boundary; they surface as `VOCDM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use num_complex::Complex64;
use vocdm::channel::{effective_channel_any, ChannelRealization, ChannelSpec};
use vocdm::diversity::order_set;
use vocdm::modem::{Constellation, ModulationParams, Modulator, TransformKind};
use vocdm::papr::{overall_papr_exhaustive, theoretical_ccdf};
use vocdm::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VocdmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    BudgetExceeded = 4,
    Unsupported = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VocdmKind {
    Fresnel = 0,
    Fourier = 1,
    Identity = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VocdmConstellation {
    Bpsk = 0,
    Qpsk = 1,
    Pam4 = 2,
}

/// Opaque modulator handle.
pub struct VocdmModulator {
    inner: Modulator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> VocdmStatus {
    match e {
        Error::InScheme { source, .. } => status_of(source),
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => VocdmStatus::LengthMismatch,
        Error::BudgetExceeded { .. } => VocdmStatus::BudgetExceeded,
        Error::UnsupportedKind { .. } => VocdmStatus::Unsupported,
        Error::NotHermitian { .. }
        | Error::Indefinite { .. }
        | Error::RankDeficientCovariance { .. }
        | Error::Singular => VocdmStatus::Numerical,
        _ => VocdmStatus::InvalidArgument,
    }
}

struct Failure(VocdmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(VocdmStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> VocdmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VocdmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            VocdmStatus::Panic
        }
    }
}

impl From<VocdmKind> for TransformKind {
    fn from(k: VocdmKind) -> Self {
        match k {
            VocdmKind::Fresnel => TransformKind::Fresnel,
            VocdmKind::Fourier => TransformKind::Fourier,
            VocdmKind::Identity => TransformKind::Identity,
        }
    }
}

impl From<VocdmConstellation> for Constellation {
    fn from(c: VocdmConstellation) -> Self {
        match c {
            VocdmConstellation::Bpsk => Constellation::bpsk(),
            VocdmConstellation::Qpsk => Constellation::qpsk(),
            VocdmConstellation::Pam4 => Constellation::pam4(),
        }
    }
}

/// Interleaved doubles viewed as complex entries. `Complex64` is `repr(C)`
/// with the same alignment as `double`.
unsafe fn complex_in<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [Complex64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p.cast::<Complex64>(), len))
}

unsafe fn complex_out<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [Complex64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p.cast::<Complex64>(), len))
}

fn check_len(op: &str, expected: usize, actual: usize) -> Result<(), Failure> {
    if expected != actual {
        return Err(Failure(
            VocdmStatus::LengthMismatch,
            format!("{op}: expected {expected} complex entries, got {actual}"),
        ));
    }
    Ok(())
}

/// Message for the last failing call on this thread; empty if none.
#[no_mangle]
pub extern "C" fn vocdm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vocdm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a modulator for `m` sub-blocks of length `n`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn vocdm_modulator_new(
    m: usize,
    n: usize,
    kind: VocdmKind,
    out: *mut *mut VocdmModulator,
) -> VocdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModulationParams::new(m, n, kind.into())?;
        let handle = Box::new(VocdmModulator {
            inner: Modulator::new(params),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `handle` must come from [`vocdm_modulator_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn vocdm_modulator_free(handle: *mut VocdmModulator) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Block size `K = M·N`, or 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vocdm_modulator_block_size(handle: *const VocdmModulator) -> usize {
    handle.as_ref().map_or(0, |h| h.inner.params().k())
}

unsafe fn transform(
    handle: *const VocdmModulator,
    input: *const f64,
    output: *mut f64,
    len: usize,
    forward: bool,
) -> VocdmStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        check_len("modulator", h.inner.params().k(), len)?;
        let x = complex_in(input, len, "input")?;
        let y = if forward {
            h.inner.modulate(x)?
        } else {
            h.inner.demodulate(x)?
        };
        complex_out(output, len, "output")?.copy_from_slice(&y);
        Ok(())
    })
}

/// Maps `len` symbols to `len` time-domain samples. `len` must equal the
/// block size. `input` and `output` may alias.
///
/// # Safety
/// `input` and `output` must each point to `2·len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vocdm_modulator_modulate(
    handle: *const VocdmModulator,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> VocdmStatus {
    transform(handle, input, output, len, true)
}

/// Inverse of [`vocdm_modulator_modulate`].
///
/// # Safety
/// `input` and `output` must each point to `2·len` doubles.
#[no_mangle]
pub unsafe extern "C" fn vocdm_modulator_demodulate(
    handle: *const VocdmModulator,
    input: *const f64,
    output: *mut f64,
    len: usize,
) -> VocdmStatus {
    transform(handle, input, output, len, false)
}

/// Number of channel coefficients `(L+1)(2Q+1)`.
#[no_mangle]
pub extern "C" fn vocdm_channel_coefficients(l: usize, q: usize) -> usize {
    (l + 1) * (2 * q + 1)
}

/// Effective channel of a modulator for the coefficient vector `coeffs`
/// (ordered `(q+Q)(L+1)+l`), written row-major into `out` (`K·K` entries).
///
/// # Safety
/// `coeffs` must point to `2·coeffs_len` doubles and `out` to `2·out_len`.
#[no_mangle]
pub unsafe extern "C" fn vocdm_effective_channel(
    handle: *const VocdmModulator,
    l: usize,
    q: usize,
    coeffs: *const f64,
    coeffs_len: usize,
    out: *mut f64,
    out_len: usize,
) -> VocdmStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let p = h.inner.params();
        let k = p.k();
        check_len("effective channel output", k * k, out_len)?;
        let spec = ChannelSpec::iid(l, q, k)?;
        check_len("channel coefficients", spec.rho(), coeffs_len)?;
        let real = ChannelRealization::new(&spec, complex_in(coeffs, coeffs_len, "coeffs")?.to_vec())?;
        let h_eff = effective_channel_any(&real, &spec, p)?;
        complex_out(out, out_len, "out")?.copy_from_slice(h_eff.as_slice());
        Ok(())
    })
}

/// Number of distinct occupied sub-diagonals of the effective channel.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vocdm_order_set_size(l: usize, q: usize, m: usize, n: usize, out: *mut usize) -> VocdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if m == 0 || n == 0 {
            return Err(Failure(VocdmStatus::InvalidArgument, "m and n must be positive".into()));
        }
        *out = order_set(l, q, m, n).size();
        Ok(())
    })
}

/// Exhaustive overall PAPR of a single sub-block of length `n`, searching
/// at most `budget` candidates.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vocdm_overall_papr(
    n: usize,
    kind: VocdmKind,
    constellation: VocdmConstellation,
    budget: u64,
    out: *mut f64,
) -> VocdmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = ModulationParams::new(1, n, kind.into())?;
        *out = overall_papr_exhaustive(&p, &constellation.into(), budget)?.value;
        Ok(())
    })
}

/// `Pr(PAPR > gamma)` under the Gaussian sample approximation for block
/// size `k`; `gamma` is linear.
#[no_mangle]
pub extern "C" fn vocdm_theoretical_ccdf(gamma: f64, k: usize) -> f64 {
    theoretical_ccdf(gamma, k)
}

use std::ffi::CStr;
use std::ptr;

use vocdm::channel::{effective_channel, sample_channel, ChannelSpec};
use vocdm::modem::{modulate, ModulationParams};
use vocdm::Complex64;
use vocdm_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(vocdm_last_error()) }.to_string_lossy().into_owned()
}

fn interleave(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn new_modulator(m: usize, n: usize, kind: VocdmKind) -> *mut VocdmModulator {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { vocdm_modulator_new(m, n, kind, &mut h) }, VocdmStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn modulate_matches_library() {
    let h = new_modulator(3, 4, VocdmKind::Fresnel);
    let s: Vec<Complex64> = (0..12).map(|i| Complex64::new(i as f64, -(i as f64) / 2.0)).collect();
    let mut out = vec![0.0; 24];
    let st = unsafe { vocdm_modulator_modulate(h, interleave(&s).as_ptr(), out.as_mut_ptr(), 12) };
    assert_eq!(st, VocdmStatus::Ok);
    let expect = interleave(&modulate(&s, &ModulationParams::fresnel(3, 4)).unwrap());
    assert!(out.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-12));

    let mut buf = out.clone();
    let st = unsafe { vocdm_modulator_demodulate(h, buf.as_ptr(), buf.as_mut_ptr(), 12) };
    assert_eq!(st, VocdmStatus::Ok);
    assert!(buf.iter().zip(interleave(&s)).all(|(a, b)| (a - b).abs() < 1e-12));
    unsafe { vocdm_modulator_free(h) };
}

#[test]
fn effective_channel_matches_library() {
    let (m, n, l, q) = (2, 4, 1, 1);
    let h = new_modulator(m, n, VocdmKind::Fresnel);
    let spec = ChannelSpec::iid(l, q, m * n).unwrap();
    let real = sample_channel(&spec, 9).unwrap();
    let coeffs = interleave(&real.h);
    let mut out = vec![0.0; 2 * 64];
    let st = unsafe { vocdm_effective_channel(h, l, q, coeffs.as_ptr(), real.h.len(), out.as_mut_ptr(), 64) };
    assert_eq!(st, VocdmStatus::Ok);
    let expect = effective_channel(&real, &spec, &ModulationParams::fresnel(m, n)).unwrap();
    assert_eq!(out, interleave(expect.as_slice()));

    let st = unsafe { vocdm_effective_channel(h, l, q, coeffs.as_ptr(), 3, out.as_mut_ptr(), 64) };
    assert_eq!(st, VocdmStatus::LengthMismatch);
    assert!(last_error().contains("expected 6"), "{}", last_error());
    unsafe { vocdm_modulator_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { vocdm_modulator_new(0, 4, VocdmKind::Fresnel, &mut h) }, VocdmStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(
        unsafe { vocdm_modulator_new(1, 4, VocdmKind::Fresnel, ptr::null_mut()) },
        VocdmStatus::NullPointer
    );
    assert_eq!(
        unsafe { vocdm_modulator_modulate(ptr::null(), ptr::null(), ptr::null_mut(), 0) },
        VocdmStatus::NullPointer
    );
    assert_eq!(unsafe { vocdm_modulator_block_size(ptr::null()) }, 0);

    let fourier = new_modulator(2, 2, VocdmKind::Fourier);
    let mut out = vec![0.0; 32];
    let coeffs = [1.0, 0.0];
    let st = unsafe { vocdm_effective_channel(fourier, 0, 0, coeffs.as_ptr(), 1, out.as_mut_ptr(), 16) };
    assert_eq!(st, VocdmStatus::Ok);
    unsafe { vocdm_modulator_free(fourier) };

    let mut papr = -1.0;
    let st = unsafe { vocdm_overall_papr(30, VocdmKind::Fresnel, VocdmConstellation::Qpsk, 10, &mut papr) };
    assert_eq!(st, VocdmStatus::BudgetExceeded);
    assert_eq!(papr, -1.0);
}

#[test]
fn scalar_queries() {
    let mut size = 0;
    assert_eq!(unsafe { vocdm_order_set_size(2, 1, 1, 4, &mut size) }, VocdmStatus::Ok);
    assert_eq!(size, 4);
    assert_eq!(unsafe { vocdm_order_set_size(1, 1, 0, 4, &mut size) }, VocdmStatus::InvalidArgument);

    let mut papr = 0.0;
    let st = unsafe { vocdm_overall_papr(6, VocdmKind::Fresnel, VocdmConstellation::Bpsk, 1 << 20, &mut papr) };
    assert_eq!(st, VocdmStatus::Ok);
    assert!(papr > 1.0 && papr < 6.0);
    assert_eq!(vocdm_channel_coefficients(2, 3), 21);
    assert!((vocdm_theoretical_ccdf(1e9, 100)).abs() < 1e-12);
    let v = unsafe { CStr::from_ptr(vocdm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn last_error_is_per_thread() {
    let mut h = ptr::null_mut();
    unsafe { vocdm_modulator_new(0, 0, VocdmKind::Fresnel, &mut h) };
    let here = last_error();
    let there = std::thread::spawn(last_error).join().unwrap();
    assert!(!here.is_empty());
    assert!(there.is_empty());
}

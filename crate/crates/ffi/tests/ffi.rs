use std::ffi::{CStr, CString};
use std::ptr;

use iqa_ffi::*;

fn image_u8(data: &[u8], w: usize, h: usize) -> *mut IqaImage {
    let mut out = ptr::null_mut();
    let status = unsafe { iqa_image_from_u8(data.as_ptr(), w, h, &mut out) };
    assert_eq!(status, IqaStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = iqa_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn ramp(w: usize, h: usize) -> Vec<u8> {
    (0..w * h).map(|i| ((i * 37 + (i / w) * 11) % 256) as u8).collect()
}

#[test]
fn image_lifecycle() {
    let img = image_u8(&ramp(20, 12), 20, 12);
    let (mut w, mut h) = (0usize, 0usize);
    assert_eq!(unsafe { iqa_image_dimensions(img, &mut w, &mut h) }, IqaStatus::Ok);
    assert_eq!((w, h), (20, 12));
    unsafe { iqa_image_free(img) };
    unsafe { iqa_image_free(ptr::null_mut()) };

    let data = [0.0f64, 255.0, 300.0, 1.0];
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { iqa_image_from_f64(data.as_ptr(), 2, 2, &mut out) },
        IqaStatus::InvalidParameter
    );
    assert!(out.is_null());
    assert!(last_error().contains("300"), "{}", last_error());
}

#[test]
fn haarpsi_identity_and_presets() {
    let data = ramp(32, 32);
    let a = image_u8(&data, 32, 32);
    let b = image_u8(&data, 32, 32);
    let mut score = 0.0;
    assert_eq!(unsafe { iqa_haarpsi(a, b, ptr::null(), &mut score) }, IqaStatus::Ok);
    assert_eq!(score, 1.0);

    let mut params = IqaHaarPsiParams { c: 0.0, alpha: 0.0, subsample: 0, zero_padding: 1 };
    let name = CString::new("med").unwrap();
    assert_eq!(unsafe { iqa_haarpsi_preset(name.as_ptr(), &mut params) }, IqaStatus::Ok);
    assert_eq!(params, IqaHaarPsiParams { c: 5.0, alpha: 4.9, subsample: 1, zero_padding: 0 });

    let bad = CString::new("xray").unwrap();
    assert_eq!(
        unsafe { iqa_haarpsi_preset(bad.as_ptr(), &mut params) },
        IqaStatus::InvalidParameter
    );

    let noisy: Vec<u8> = data.iter().enumerate().map(|(i, v)| v.wrapping_add((i % 7) as u8 * 3)).collect();
    let c = image_u8(&noisy, 32, 32);
    let (mut s_def, mut s_med) = (0.0, 0.0);
    let med = IqaHaarPsiParams { c: 5.0, alpha: 4.9, subsample: 1, zero_padding: 0 };
    unsafe {
        assert_eq!(iqa_haarpsi(a, c, ptr::null(), &mut s_def), IqaStatus::Ok);
        assert_eq!(iqa_haarpsi(a, c, &med, &mut s_med), IqaStatus::Ok);
    }
    assert!(s_def < 1.0 && s_med < s_def, "default {s_def} med {s_med}");

    let broken = IqaHaarPsiParams { c: -1.0, ..med };
    assert_eq!(unsafe { iqa_haarpsi(a, c, &broken, &mut score) }, IqaStatus::InvalidParameter);
    unsafe {
        iqa_image_free(a);
        iqa_image_free(b);
        iqa_image_free(c);
    }
}

#[test]
fn baselines() {
    let data = ramp(24, 24);
    let a = image_u8(&data, 24, 24);
    let shifted: Vec<u8> = data.iter().map(|v| v.saturating_add(2)).collect();
    let b = image_u8(&shifted, 24, 24);
    let (mut p, mut q, mut s) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(iqa_psnr(a, a, &mut p), IqaStatus::Ok);
        assert_eq!(iqa_psnr(a, b, &mut q), IqaStatus::Ok);
        assert_eq!(iqa_ssim(a, a, &mut s), IqaStatus::Ok);
    }
    assert!(p.is_infinite() && p > 0.0);
    assert!(q.is_finite() && q > 40.0);
    assert!((s - 1.0).abs() < 1e-12);
    unsafe {
        iqa_image_free(a);
        iqa_image_free(b);
    }
}

#[test]
fn shape_mismatch_is_reported() {
    let a = image_u8(&ramp(16, 16), 16, 16);
    let b = image_u8(&ramp(16, 8), 16, 8);
    let mut score = 0.0;
    assert_eq!(unsafe { iqa_haarpsi(a, b, ptr::null(), &mut score) }, IqaStatus::Shape);
    let msg = last_error();
    assert!(msg.contains("16x16") && msg.contains("16x8"), "{msg}");
    unsafe {
        iqa_image_free(a);
        iqa_image_free(b);
    }
}

#[test]
fn null_pointers_are_rejected() {
    let mut score = 0.0;
    assert_eq!(
        unsafe { iqa_haarpsi(ptr::null(), ptr::null(), ptr::null(), &mut score) },
        IqaStatus::NullPointer
    );
    assert!(last_error().contains("reference"));
    let a = image_u8(&ramp(8, 8), 8, 8);
    assert_eq!(
        unsafe { iqa_psnr(a, a, ptr::null_mut()) },
        IqaStatus::NullPointer
    );
    assert_eq!(
        unsafe { iqa_image_from_u8(ptr::null(), 4, 4, &mut ptr::null_mut()) },
        IqaStatus::NullPointer
    );
    assert_eq!(unsafe { iqa_image_load(ptr::null(), &mut ptr::null_mut()) }, IqaStatus::NullPointer);
    unsafe { iqa_image_free(a) };
}

#[test]
fn missing_file_is_io_error() {
    let path = CString::new("/nonexistent/image.png").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { iqa_image_load(path.as_ptr(), &mut out) }, IqaStatus::Io);
    assert!(out.is_null());
}

#[test]
fn rank_correlations() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 1.0, 4.0, 3.0, 5.0];
    let (mut s, mut k) = (0.0, 0.0);
    unsafe {
        assert_eq!(iqa_srcc(x.as_ptr(), y.as_ptr(), 5, &mut s), IqaStatus::Ok);
        assert_eq!(iqa_krcc(x.as_ptr(), y.as_ptr(), 5, &mut k), IqaStatus::Ok);
    }
    assert!((s - 0.8).abs() < 1e-12);
    assert!((k - 0.6).abs() < 1e-12);
    assert_eq!(unsafe { iqa_srcc(x.as_ptr(), y.as_ptr(), 1, &mut s) }, IqaStatus::Internal);
}

#[test]
fn steiger_values() {
    let (mut z, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { iqa_steiger(0.5, 0.3, 0.4, 100, &mut z, &mut p) }, IqaStatus::Ok);
    assert!((z - 2.034870335707).abs() < 1e-9);
    assert!((p - 0.041863921528).abs() < 1e-9);
    assert_eq!(
        unsafe { iqa_steiger(1.5, 0.3, 0.4, 100, &mut z, &mut p) },
        IqaStatus::Internal
    );
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/iqa.h");
    for name in [
        "iqa_last_error_message",
        "iqa_image_from_u8",
        "iqa_image_from_f64",
        "iqa_image_load",
        "iqa_image_free",
        "iqa_image_dimensions",
        "iqa_haarpsi_preset",
        "iqa_haarpsi",
        "iqa_psnr",
        "iqa_ssim",
        "iqa_srcc",
        "iqa_krcc",
        "iqa_steiger",
        "typedef struct IqaImage IqaImage",
        "IQA_STATUS_SHAPE = 3",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

//! C ABI over `iqa-core`.
//!
//! Images are opaque `IqaImage` handles holding a grayscale raster in the
//! `[0, 255]` working range. Every function returns an [`IqaStatus`]; on
//! failure `iqa_last_error_message` describes the error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use iqa_core::baselines::{psnr, ssim, SsimConfig};
use iqa_core::haarpsi::{haarpsi, HaarPsiParams, Preset};
use iqa_core::harness::Preprocess;
use iqa_core::imgio::{DynamicRange, GrayImage};
use iqa_core::stats::{krcc, srcc, steiger_test};
use iqa_core::wavelet::Padding;
use iqa_core::IqaError;

/// Status codes; 2 to 5 match the `iqa` binary's exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IqaStatus {
    Ok = 0,
    NullPointer = 1,
    Io = 2,
    Shape = 3,
    InvalidParameter = 4,
    Internal = 5,
}

/// Opaque grayscale image.
pub struct IqaImage {
    inner: GrayImage,
}

/// HaarPSI settings. `subsample` and `zero_padding` are booleans (0 or 1).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqaHaarPsiParams {
    pub c: f64,
    pub alpha: f64,
    pub subsample: i32,
    pub zero_padding: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &IqaError) -> IqaStatus {
    match err.exit_code() {
        2 => IqaStatus::Io,
        3 => IqaStatus::Shape,
        4 => IqaStatus::InvalidParameter,
        _ => IqaStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Core(IqaError),
}

impl From<IqaError> for Failure {
    fn from(e: IqaError) -> Self {
        Failure::Core(e)
    }
}

/// Runs `f`, records any error for `iqa_last_error_message` and converts
/// panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IqaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IqaStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is a null pointer"));
            IqaStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".to_string());
            IqaStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn store_image(out: *mut *mut IqaImage, inner: GrayImage) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(IqaImage { inner })), "out")
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iqa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Builds an image from `width * height` row-major 8-bit samples.
///
/// # Safety
/// `data` must point to `width * height` readable bytes and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_image_from_u8(
    data: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut IqaImage,
) -> IqaStatus {
    guard(|| {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| IqaError::InvalidParameter("image size overflows".into()))?;
        let samples = slice(data, len, "data")?;
        let img = GrayImage::new(
            width,
            height,
            samples.iter().map(|v| f64::from(*v)).collect(),
            DynamicRange::Byte,
        )?;
        store_image(out, img)
    })
}

/// Builds an image from `width * height` row-major samples in `[0, 255]`.
///
/// # Safety
/// `data` must point to `width * height` readable doubles and `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_image_from_f64(
    data: *const f64,
    width: usize,
    height: usize,
    out: *mut *mut IqaImage,
) -> IqaStatus {
    guard(|| {
        let len = width
            .checked_mul(height)
            .ok_or_else(|| IqaError::InvalidParameter("image size overflows".into()))?;
        let samples = slice(data, len, "data")?;
        let img = GrayImage::new(width, height, samples.to_vec(), DynamicRange::Byte)?;
        store_image(out, img)
    })
}

/// Decodes a PNG/PGM/PPM file; color images are converted to grayscale.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_image_load(path: *const c_char, out: *mut *mut IqaImage) -> IqaStatus {
    guard(|| {
        let path = CStr::from_ptr(deref(path, "path")?)
            .to_str()
            .map_err(|_| IqaError::InvalidParameter("path is not valid UTF-8".into()))?;
        let pre = Preprocess {
            grayscale: true,
            ..Preprocess::default()
        };
        let img = pre.load(Path::new(path))?;
        store_image(out, img)
    })
}

/// Releases an image. NULL is ignored.
///
/// # Safety
/// `image` must come from one of the constructors and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn iqa_image_free(image: *mut IqaImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// # Safety
/// `image` must be a live handle; `width` and `height` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_image_dimensions(
    image: *const IqaImage,
    width: *mut usize,
    height: *mut usize,
) -> IqaStatus {
    guard(|| {
        let img = &deref(image, "image")?.inner;
        write_out(width, img.width(), "width")?;
        write_out(height, img.height(), "height")
    })
}

fn to_params(p: &IqaHaarPsiParams) -> Result<HaarPsiParams, IqaError> {
    let padding = if p.zero_padding != 0 {
        Padding::Zero
    } else {
        Padding::Symmetric
    };
    Ok(HaarPsiParams::new(p.c, p.alpha)?
        .with_subsample(p.subsample != 0)
        .with_padding(padding))
}

fn from_params(p: &HaarPsiParams) -> IqaHaarPsiParams {
    IqaHaarPsiParams {
        c: p.c,
        alpha: p.alpha,
        subsample: i32::from(p.subsample),
        zero_padding: i32::from(p.padding == Padding::Zero),
    }
}

/// Fills `out` with a named preset: `default`, `med`, `cxr` or `pa`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_haarpsi_preset(
    name: *const c_char,
    out: *mut IqaHaarPsiParams,
) -> IqaStatus {
    guard(|| {
        let name = CStr::from_ptr(deref(name, "name")?).to_string_lossy();
        let preset: Preset = name.parse()?;
        write_out(out, from_params(&preset.params()), "out")
    })
}

/// HaarPSI of `distorted` against `reference`. `params` may be NULL for
/// the default preset.
///
/// # Safety
/// Handles must be live; `params` is NULL or readable; `score` is writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_haarpsi(
    reference: *const IqaImage,
    distorted: *const IqaImage,
    params: *const IqaHaarPsiParams,
    score: *mut f64,
) -> IqaStatus {
    guard(|| {
        let r = &deref(reference, "reference")?.inner;
        let d = &deref(distorted, "distorted")?.inner;
        let p = match params.as_ref() {
            Some(p) => to_params(p)?,
            None => HaarPsiParams::default(),
        };
        write_out(score, haarpsi(r, d, &p)?, "score")
    })
}

/// PSNR in dB with peak 255; identical images give +infinity.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_psnr(
    reference: *const IqaImage,
    distorted: *const IqaImage,
    out: *mut f64,
) -> IqaStatus {
    guard(|| {
        let r = &deref(reference, "reference")?.inner;
        let d = &deref(distorted, "distorted")?.inner;
        write_out(out, psnr(r, d, 255.0)?, "out")
    })
}

/// Mean SSIM with the standard 11x11 Gaussian window.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_ssim(
    reference: *const IqaImage,
    distorted: *const IqaImage,
    out: *mut f64,
) -> IqaStatus {
    guard(|| {
        let r = &deref(reference, "reference")?.inner;
        let d = &deref(distorted, "distorted")?.inner;
        write_out(out, ssim(r, d, &SsimConfig::default())?, "out")
    })
}

/// Spearman correlation of two length-`n` vectors.
///
/// # Safety
/// `x` and `y` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_srcc(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> IqaStatus {
    guard(|| {
        let v = srcc(slice(x, n, "x")?, slice(y, n, "y")?)?;
        write_out(out, v, "out")
    })
}

/// Kendall tau-a of two length-`n` vectors.
///
/// # Safety
/// `x` and `y` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_krcc(x: *const f64, y: *const f64, n: usize, out: *mut f64) -> IqaStatus {
    guard(|| {
        let v = krcc(slice(x, n, "x")?, slice(y, n, "y")?)?;
        write_out(out, v, "out")
    })
}

/// Steiger's test for two dependent correlations sharing variable j.
///
/// # Safety
/// `z` and `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iqa_steiger(
    r_jk: f64,
    r_jh: f64,
    r_kh: f64,
    n: usize,
    z: *mut f64,
    p: *mut f64,
) -> IqaStatus {
    guard(|| {
        let outcome = steiger_test(r_jk, r_jh, r_kh, n)?;
        write_out(z, outcome.statistic, "z")?;
        write_out(p, outcome.p, "p")
    })
}

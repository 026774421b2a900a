// SPDX-License-Identifier: Apache-2.0

//! C ABI over `polarseg-core`.
//!
//! Configs and results are opaque heap handles released with their `_free`
//! function. Every fallible call returns a [`PsStatus`]; on failure the
//! calling thread's message is available from [`ps_last_error_message`].
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use polarseg_core::io::{load_config, parse_config};
use polarseg_core::{CellLabel, Error, Point3, SegmentationConfig, SegmentationResult, Segmenter};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    Io = 4,
    Parse = 5,
    EmptyScan = 6,
    Panic = 7,
}

/// Values of the cell label buffer.
#[repr(u8)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsCellLabel {
    Empty = 0,
    Unknown = 1,
    Ground = 2,
    NoisyGround = 3,
    Object = 4,
}

/// Per-stage wall-clock time of one run, milliseconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PsTimings {
    pub pgm_ms: f64,
    pub ugl_ms: f64,
    pub ege_ms: f64,
    pub pgs_ms: f64,
    pub total_ms: f64,
}

pub struct PsConfig {
    inner: SegmentationConfig,
}

pub struct PsResult {
    ground: Vec<u8>,
    elevation: Vec<f64>,
    cell_labels: Vec<u8>,
    num_segments: usize,
    num_cells: usize,
    num_ground: usize,
    timings: PsTimings,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PsStatus {
    match e {
        Error::Config(_) | Error::NegativeGrowth(..) => PsStatus::InvalidConfig,
        Error::Io { .. } => PsStatus::Io,
        Error::Parse { .. } | Error::Truncated { .. } | Error::NonFinite { .. } => PsStatus::Parse,
        Error::EmptyScan => PsStatus::EmptyScan,
        _ => PsStatus::InvalidArgument,
    }
}

/// Run `f`, recording any error or panic for `ps_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), (PsStatus, String)>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            PsStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (PsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PsStatus, String) {
    (PsStatus::NullArgument, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// HDL-64E defaults. Never NULL.
#[no_mangle]
pub extern "C" fn ps_config_default() -> *mut PsConfig {
    Box::into_raw(Box::new(PsConfig {
        inner: SegmentationConfig::hdl64e(),
    }))
}

fn store_config(out: *mut *mut PsConfig, cfg: SegmentationConfig) {
    // SAFETY: caller checked `out` for null.
    unsafe { *out = Box::into_raw(Box::new(PsConfig { inner: cfg })) };
}

/// Load a TOML config file. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_config_load(path: *const c_char, out: *mut *mut PsConfig) -> PsStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (PsStatus::InvalidArgument, "path is not UTF-8".to_string()))?;
        store_config(out, load_config(path).map_err(core_err)?);
        Ok(())
    })
}

/// Parse config text in the file format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_config_parse(text: *const c_char, out: *mut *mut PsConfig) -> PsStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| (PsStatus::InvalidArgument, "config text is not UTF-8".to_string()))?;
        store_config(out, parse_config(text).map_err(core_err)?);
        Ok(())
    })
}

/// # Safety
/// `config` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ps_config_free(config: *mut PsConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

fn convert(result: SegmentationResult) -> PsResult {
    let ms = |us: f64| us / 1e3;
    PsResult {
        num_ground: result.num_ground(),
        ground: result.ground.iter().map(|&g| u8::from(g)).collect(),
        elevation: result.elevation.iter().map(|e| e.unwrap_or(f64::NAN)).collect(),
        cell_labels: result.cell_labels.iter().map(|&l| l as u8).collect(),
        num_segments: result.num_segments,
        num_cells: result.num_cells,
        timings: PsTimings {
            pgm_ms: ms(result.timings.pgm_us),
            ugl_ms: ms(result.timings.ugl_us),
            ege_ms: ms(result.timings.ege_us),
            pgs_ms: ms(result.timings.pgs_us),
            total_ms: ms(result.timings.total_us),
        },
    }
}

/// Segment `n` points. Point `k` is `xyz[k * stride .. k * stride + 3]`, so
/// KITTI x/y/z/intensity buffers use `stride = 4`.
///
/// # Safety
/// `xyz` must hold at least `(n - 1) * stride + 3` floats; `out` must be a
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_segment(
    config: *const PsConfig,
    xyz: *const f32,
    n: usize,
    stride: usize,
    out: *mut *mut PsResult,
) -> PsStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err((PsStatus::EmptyScan, "empty scan".into()));
        }
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        if stride < 3 {
            return Err((PsStatus::InvalidArgument, format!("stride {stride} < 3")));
        }
        let len = (n - 1)
            .checked_mul(stride)
            .and_then(|v| v.checked_add(3))
            .ok_or((PsStatus::InvalidArgument, "n * stride overflows".to_string()))?;
        let data = std::slice::from_raw_parts(xyz, len);
        let mut points = Vec::with_capacity(n);
        for k in 0..n {
            let p = &data[k * stride..k * stride + 3];
            if !p.iter().all(|v| v.is_finite()) {
                return Err((PsStatus::InvalidArgument, format!("non-finite coordinate at point {k}")));
            }
            points.push(Point3::new(p[0] as f64, p[1] as f64, p[2] as f64));
        }
        let result = Segmenter::new((*config).inner.clone())
            .and_then(|s| s.segment(&points))
            .map_err(core_err)?;
        *out = Box::into_raw(Box::new(convert(result)));
        Ok(())
    })
}

/// # Safety
/// `result` must come from `ps_segment` and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn ps_result_free(result: *mut PsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_result_len(result: *const PsResult) -> usize {
    result.as_ref().map_or(0, |r| r.ground.len())
}

/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_result_num_ground(result: *const PsResult) -> usize {
    result.as_ref().map_or(0, |r| r.num_ground)
}

/// Per-point flags in input order, 1 = ground. Owned by `result`.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_result_ground(result: *const PsResult) -> *const u8 {
    result.as_ref().map_or(ptr::null(), |r| r.ground.as_ptr())
}

/// Per-point interpolated ground height; NaN where none was estimated.
///
/// # Safety
/// `result` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_result_elevations(result: *const PsResult) -> *const f64 {
    result.as_ref().map_or(ptr::null(), |r| r.elevation.as_ptr())
}

/// Final cell labels ([`PsCellLabel`] values), segment-major: cell `(i, j)`
/// is at `i * num_cells + j`. Grid dimensions are written when the out
/// pointers are non-NULL.
///
/// # Safety
/// `result` must be NULL or a live handle; the out pointers NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_result_cell_labels(
    result: *const PsResult,
    num_segments: *mut usize,
    num_cells: *mut usize,
) -> *const u8 {
    let Some(r) = result.as_ref() else {
        return ptr::null();
    };
    if let Some(s) = num_segments.as_mut() {
        *s = r.num_segments;
    }
    if let Some(c) = num_cells.as_mut() {
        *c = r.num_cells;
    }
    r.cell_labels.as_ptr()
}

/// # Safety
/// `result` must be NULL or a live handle and `out` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_result_timings(result: *const PsResult, out: *mut PsTimings) -> PsStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = r.timings;
        Ok(())
    })
}

// Keep the C enum in step with the core labels.
const _: () = {
    assert!(CellLabel::Empty as u8 == PsCellLabel::Empty as u8);
    assert!(CellLabel::Unknown as u8 == PsCellLabel::Unknown as u8);
    assert!(CellLabel::Ground as u8 == PsCellLabel::Ground as u8);
    assert!(CellLabel::NoisyGround as u8 == PsCellLabel::NoisyGround as u8);
    assert!(CellLabel::Object as u8 == PsCellLabel::Object as u8);
};

// SPDX-License-Identifier: Apache-2.0

use std::ffi::{CStr, CString};
use std::ptr;

use polarseg::*;

fn last_error() -> String {
    let p = ps_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

/// Flat ground rings 1 m apart from 3 m outwards, 360 points per ring,
/// x/y/z/intensity per point.
fn flat_xyzi(n: usize) -> Vec<f32> {
    (0..n)
        .flat_map(|k| {
            let a = ((k % 360) as f64).to_radians();
            let r = 3.0 + (k / 360) as f64;
            [(r * a.cos()) as f32, (r * a.sin()) as f32, -1.73, 0.5]
        })
        .collect()
}

fn segment(cfg: *const PsConfig, xyz: &[f32], n: usize, stride: usize) -> (PsStatus, *mut PsResult) {
    let mut out = ptr::null_mut();
    let s = unsafe { ps_segment(cfg, xyz.as_ptr(), n, stride, &mut out) };
    (s, out)
}

#[test]
fn segments_a_strided_buffer() {
    let cfg = ps_config_default();
    let data = flat_xyzi(3600);
    let (s, res) = segment(cfg, &data, 3600, 4);
    assert_eq!(s, PsStatus::Ok);
    unsafe {
        assert_eq!(ps_result_len(res), 3600);
        assert_eq!(ps_result_num_ground(res), 3600);
        let ground = std::slice::from_raw_parts(ps_result_ground(res), 3600);
        assert!(ground.iter().all(|&g| g == 1));
        let elev = std::slice::from_raw_parts(ps_result_elevations(res), 3600);
        assert!(elev.iter().all(|e| (e + 1.73).abs() < 1e-3));
        let (mut l, mut m) = (0, 0);
        let cells = ps_result_cell_labels(res, &mut l, &mut m);
        assert_eq!((l, m), (120, 80));
        let cells = std::slice::from_raw_parts(cells, l * m);
        assert!(cells.contains(&(PsCellLabel::Ground as u8)));
        let mut t = PsTimings::default();
        assert_eq!(ps_result_timings(res, &mut t), PsStatus::Ok);
        assert!(t.total_ms >= t.pgm_ms);
        ps_result_free(res);
        ps_config_free(cfg);
    }
}

#[test]
fn packed_and_strided_inputs_agree() {
    let cfg = ps_config_default();
    let xyzi = flat_xyzi(300);
    let xyz: Vec<f32> = xyzi.chunks(4).flat_map(|c| [c[0], c[1], c[2]]).collect();
    let (_, a) = segment(cfg, &xyzi, 300, 4);
    let (_, b) = segment(cfg, &xyz, 300, 3);
    unsafe {
        let ea = std::slice::from_raw_parts(ps_result_elevations(a), 300);
        let eb = std::slice::from_raw_parts(ps_result_elevations(b), 300);
        assert!(ea.iter().zip(eb).all(|(x, y)| x.to_bits() == y.to_bits()));
        ps_result_free(a);
        ps_result_free(b);
        ps_config_free(cfg);
    }
}

#[test]
fn rejects_bad_arguments() {
    let cfg = ps_config_default();
    let data = flat_xyzi(10);
    assert_eq!(segment(cfg, &data, 0, 4).0, PsStatus::EmptyScan);
    assert_eq!(segment(cfg, &data, 10, 2).0, PsStatus::InvalidArgument);
    assert!(last_error().contains("stride"));
    assert_eq!(segment(ptr::null(), &data, 10, 4).0, PsStatus::NullArgument);
    let mut nan = data.clone();
    nan[4 * 7 + 1] = f32::NAN;
    assert_eq!(segment(cfg, &nan, 10, 4).0, PsStatus::InvalidArgument);
    assert!(last_error().contains("point 7"));
    let mut out = ptr::null_mut();
    let s = unsafe { ps_segment(cfg, ptr::null(), 10, 4, &mut out) };
    assert_eq!(s, PsStatus::NullArgument);
    assert!(out.is_null());
    unsafe {
        assert_eq!(ps_result_len(ptr::null()), 0);
        assert!(ps_result_ground(ptr::null()).is_null());
        assert_eq!(ps_result_timings(ptr::null(), ptr::null_mut()), PsStatus::NullArgument);
        ps_result_free(ptr::null_mut());
        ps_config_free(cfg);
    }
}

#[test]
fn config_errors_map_to_status() {
    let mut out = ptr::null_mut();
    let text = CString::new("[sensor]\npreset = \"hdl64e\"\n[grid]\nm = 0\n").unwrap();
    assert_eq!(unsafe { ps_config_parse(text.as_ptr(), &mut out) }, PsStatus::InvalidConfig);
    assert!(out.is_null());
    let text = CString::new("[sensor\n").unwrap();
    assert_eq!(unsafe { ps_config_parse(text.as_ptr(), &mut out) }, PsStatus::Parse);
    let path = CString::new("/nonexistent/polarseg.cfg").unwrap();
    assert_eq!(unsafe { ps_config_load(path.as_ptr(), &mut out) }, PsStatus::Io);
    assert!(last_error().contains("/nonexistent/polarseg.cfg"));
}

#[test]
fn shipped_config_loads() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hdl64e.cfg");
    let path = CString::new(path).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ps_config_load(path.as_ptr(), &mut out) }, PsStatus::Ok);
    let data = flat_xyzi(100);
    let (s, res) = segment(out, &data, 100, 4);
    assert_eq!(s, PsStatus::Ok);
    unsafe {
        ps_result_free(res);
        ps_config_free(out);
    }
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(ps_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

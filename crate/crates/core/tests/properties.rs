// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};

use polarseg_core::elevation::estimate_elevation;
use polarseg_core::eval::{aggregate_metrics, confusion_counts, ConfusionCounts};
use polarseg_core::geometry::{adaptive_slope, traditional_slope, Point3, SensorModel};
use polarseg_core::grid::{build_grid, CellLabel, GridConfig, RadialDivision};
use polarseg_core::io::{
    config_to_string, parse_config, read_labels, read_point_cloud_bin, write_labels, write_point_cloud_bin,
    LabelMapping,
};
use polarseg_core::labeling::{GroundLabeler, LabelThresholds, SlopeMode, CGP_SCHEDULE};
use polarseg_core::pipeline::{EgoBox, SegmentationConfig, Segmenter};
use proptest::prelude::*;

fn polar(r: f64, a: f64, z: f64) -> Point3 {
    Point3::new(r * a.cos(), r * a.sin(), z)
}

fn arb_point(max_r: f64) -> impl Strategy<Value = Point3> {
    (0.0..max_r, -PI..PI, -4.0..2.0f64).prop_map(|(r, a, z)| polar(r, a, z))
}

fn arb_grid() -> impl Strategy<Value = GridConfig> {
    let deg = prop::sample::select(vec![1.0, 2.0, 3.0, 4.0, 5.0, 7.5]);
    (deg, 2usize..120, 0.0..3.0f64, 20.0..100.0f64, 0u8..3, 0.01..0.1f64).prop_map(|(d, m, r0, r_max, kind, d0): (f64, _, _, _, _, _)| {
        let division = match kind {
            0 => RadialDivision::Equidistant,
            1 => RadialDivision::Linear { d0 },
            _ => RadialDivision::concentric_zones(r0, r_max),
        };
        GridConfig::new(d.to_radians(), m, r0, r_max, division)
            .or_else(|_| GridConfig::new(d.to_radians(), m, r0, r_max, RadialDivision::Equidistant))
            .unwrap()
    })
}

/// A scan dense enough to label: `n` points per ray along `rays` azimuths.
fn scene_points(rays: usize, ground_z: &[f64], bumps: &[(usize, usize, f64)]) -> Vec<Point3> {
    let mut pts = Vec::new();
    for a in 0..rays {
        let az = (a as f64 + 0.5) * TAU / rays as f64;
        for (k, &z) in ground_z.iter().enumerate() {
            let r = 2.0 + k as f64 * 1.5;
            pts.push(polar(r, az, z));
        }
    }
    for &(a, k, h) in bumps {
        let az = (a % rays) as f64 * TAU / rays as f64 + 0.01;
        let r = 2.0 + (k % ground_z.len()) as f64 * 1.5 + 0.3;
        pts.push(polar(r, az, ground_z[k % ground_z.len()] + h));
    }
    pts
}

fn arb_scene() -> impl Strategy<Value = Vec<Point3>> {
    (
        prop::collection::vec(-1.8..-1.66f64, 10..40),
        prop::collection::vec((0usize..360, 0usize..40, 0.2..2.5f64), 0..60),
    )
        .prop_map(|(zs, bumps)| scene_points(240, &zs, &bumps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adaptive_slope_is_bounded_by_traditional(
        r in 1.0..80.0f64, a in -PI..PI, z in -3.0..1.0f64,
        d in 0.05..15.0f64, b in -PI..PI, dz in -2.0..2.0f64, k in 0.0..3.0f64,
    ) {
        let pk = polar(r, a, z);
        let pl = Point3::new(pk.x + d * b.cos(), pk.y + d * b.sin(), z + dz);
        let sensor = SensorModel::hdl64e().with_k_sigma(k);
        let ts = traditional_slope(&pk, &pl).unwrap();
        let as_ = adaptive_slope(&pk, &pl, &sensor).unwrap();
        prop_assert!(as_.abs() <= ts.abs());
        prop_assert!(as_ * ts >= 0.0);
    }

    #[test]
    fn every_point_binned_once(cfg in arb_grid(), scan in prop::collection::vec(arb_point(110.0), 1..400)) {
        let (grid, out) = build_grid(&scan, &cfg);
        let binned: usize = (0..grid.num_segments())
            .flat_map(|i| (0..grid.num_cells()).map(move |j| (i, j)))
            .map(|(i, j)| grid.point_indices(i, j).len())
            .sum();
        prop_assert_eq!(binned + out.len(), scan.len());
        for k in out {
            let r = scan[k].horizontal_range();
            prop_assert!(r < cfg.r0() || r >= cfg.r_max());
            prop_assert_eq!(grid.cell_of_point(k), None);
        }
        for i in 0..grid.num_segments() {
            for j in 0..grid.num_cells() {
                let idx = grid.point_indices(i, j);
                let (lo, hi) = cfg.radial_bounds(j);
                for &k in idx {
                    let p = &scan[k as usize];
                    let r = p.horizontal_range();
                    prop_assert!(lo <= r && r < hi);
                    prop_assert_eq!(grid.cell_of_point(k as usize), Some((i, j)));
                }
                let min = idx.iter().map(|&k| scan[k as usize].z).fold(f64::INFINITY, f64::min);
                match grid.cell(i, j).rep {
                    Some(rep) => prop_assert_eq!(rep.point.z, min),
                    None => prop_assert!(idx.is_empty()),
                }
            }
        }
    }

    #[test]
    fn segment_index_is_scale_invariant(x in -50.0..50.0f64, y in -50.0..50.0f64, e in -6i32..6) {
        prop_assume!(x != 0.0 || y != 0.0);
        let cfg = GridConfig::equidistant_deg(3.0, 80, 0.0, 1e6).unwrap();
        let s = 2f64.powi(e);
        let u1 = GridConfig::azimuth_of(x, y);
        let u2 = GridConfig::azimuth_of(s * x, s * y);
        prop_assert_eq!(cfg.segment_of_azimuth(u1), cfg.segment_of_azimuth(u2));
        prop_assert!((0.0..=TAU).contains(&u1));
    }

    #[test]
    fn cross_segment_propagation_only_adds_ground(scan in arb_scene(), wrap in any::<bool>()) {
        let cfg = SegmentationConfig::hdl64e();
        let t = LabelThresholds { cgp_wrap_azimuth: wrap, ..cfg.labeling };
        let (mut grid, _) = build_grid(&scan, &cfg.grid);
        let mut l = GroundLabeler::new(&mut grid, &cfg.sensor, &t);
        l.run_segment_labeling();
        let mut prev = l.grid().cell_labels();
        for (dir, order) in CGP_SCHEDULE {
            l.propagate_cross_segment(dir, order);
            let now = l.grid().cell_labels();
            for (a, b) in prev.iter().zip(&now) {
                prop_assert!(*a == *b || *b == CellLabel::Ground);
                prop_assert!(*a != CellLabel::Ground || *b == CellLabel::Ground);
                prop_assert!((*a == CellLabel::Empty) == (*b == CellLabel::Empty));
            }
            prev = now;
        }
    }

    #[test]
    fn noiseless_plane_is_all_ground_after_sgl(
        tilt_deg in 0.0..5.0f64, heading in -PI..PI,
        steps in prop::collection::vec(0.3..5.0f64, 10..60),
        start in 1.0..3.0f64,
        mode in prop::sample::select(vec![SlopeMode::Adaptive, SlopeMode::Traditional]),
    ) {
        let cfg = SegmentationConfig::hdl64e();
        let g = tilt_deg.to_radians().tan();
        let (gx, gy) = (g * heading.cos(), g * heading.sin());
        let mut scan = Vec::new();
        for i in 0..cfg.grid.num_segments() {
            let a = PI - (i as f64 + 0.5) * cfg.grid.delta_alpha();
            let mut r = start;
            for s in &steps {
                if r >= 79.0 { break; }
                let (x, y) = (r * a.cos(), r * a.sin());
                scan.push(Point3::new(x, y, -1.73 + gx * x + gy * y));
                r += s;
            }
        }
        let (mut grid, _) = build_grid(&scan, &cfg.grid);
        let t = LabelThresholds { slope_mode: mode, ..cfg.labeling };
        GroundLabeler::new(&mut grid, &cfg.sensor, &t).run_segment_labeling();
        for (n, l) in grid.cell_labels().iter().enumerate() {
            prop_assert!(*l == CellLabel::Empty || *l == CellLabel::Ground, "cell {} is {:?}", n, l);
        }
    }

    #[test]
    fn sgl_plus_cgp_recall_dominates_sgl(scan in arb_scene()) {
        let cfg = SegmentationConfig::hdl64e();
        let ground_cells = |cgp: bool| {
            let (mut grid, _) = build_grid(&scan, &cfg.grid);
            let mut l = GroundLabeler::new(&mut grid, &cfg.sensor, &cfg.labeling);
            l.run_segment_labeling();
            if cgp {
                l.run_cross_segment_propagation();
            }
            grid.cell_labels().iter().filter(|&&l| l == CellLabel::Ground).count()
        };
        prop_assert!(ground_cells(true) >= ground_cells(false));
    }

    #[test]
    fn ground_like_cells_have_defined_corners(scan in arb_scene()) {
        let cfg = SegmentationConfig::hdl64e();
        let stages = Segmenter::new(cfg).unwrap().segment_with_stages(&scan).unwrap();
        let (grid, nodes) = (&stages.grid, &stages.result.nodes);
        prop_assert_eq!(nodes.num_rows(), grid.num_cells() + 1);
        for i in 0..grid.num_segments() {
            for j in 0..grid.num_cells() {
                if grid.label(i, j).is_ground_like() {
                    for (a, b) in nodes.cell_nodes(i, j) {
                        prop_assert!(nodes.height(a, b).is_some());
                    }
                }
            }
        }
        for (k, e) in stages.result.elevation.iter().enumerate() {
            let in_ground = grid.cell_of_point(k).is_some_and(|(i, j)| grid.label(i, j).is_ground_like());
            prop_assert_eq!(e.is_some(), in_ground);
            prop_assert!(!stages.result.ground[k] || in_ground);
        }
    }

    #[test]
    fn node_heights_stay_within_source_range(scan in arb_scene()) {
        let cfg = SegmentationConfig::hdl64e();
        let (mut grid, _) = build_grid(&scan, &cfg.grid);
        polarseg_core::labeling::label_grid(&mut grid, &cfg.sensor, &cfg.labeling);
        let labeled = grid.clone();
        let nodes = estimate_elevation(&mut grid);
        let zs: Vec<f64> = labeled
            .cells()
            .iter()
            .filter(|c| c.label.is_ground_like())
            .map(|c| c.rep.unwrap().point.z)
            .collect();
        prop_assume!(!zs.is_empty());
        let lo = zs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = zs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..nodes.num_segments() {
            for j in 0..nodes.num_rows() {
                if let Some(h) = nodes.height(i, j) {
                    prop_assert!(h >= lo - 1e-12 && h <= hi + 1e-12);
                }
            }
        }
    }

    #[test]
    fn metric_identities(tp in 0u64..10_000, fp in 0u64..10_000, tn in 0u64..10_000, fn_ in 0u64..10_000) {
        let r = ConfusionCounts::new(tp, fp, tn, fn_).report();
        for v in [r.precision, r.recall, r.f1, r.accuracy, r.miou] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let (tp, fp, tn, fn_) = (tp as f64, fp as f64, tn as f64, fn_ as f64);
        if tp + fp + tn + fn_ > 0.0 {
            prop_assert!((r.accuracy - (tp + tn) / (tp + fp + tn + fn_)).abs() < 1e-12);
        }
        if 2.0 * tp + fp + fn_ > 0.0 {
            prop_assert!((r.f1 - 2.0 * tp / (2.0 * tp + fp + fn_)).abs() < 1e-12);
        }
        if tp + fp > 0.0 && tp + fn_ > 0.0 && r.precision + r.recall > 0.0 {
            let hm = 2.0 * r.precision * r.recall / (r.precision + r.recall);
            prop_assert!((r.f1 - hm).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregation_ignores_scan_order(
        counts in prop::collection::vec((0u64..500, 0u64..500, 0u64..500, 0u64..500), 1..12),
        seed in any::<u64>(),
    ) {
        let mut c: Vec<ConfusionCounts> = counts.iter().map(|&(a, b, d, e)| ConfusionCounts::new(a, b, d, e)).collect();
        let before = aggregate_metrics(&c);
        let n = c.len();
        c.rotate_left((seed as usize) % n);
        c.reverse();
        prop_assert_eq!(aggregate_metrics(&c), before);
    }

    #[test]
    fn counts_ignore_point_order(
        pairs in prop::collection::vec((any::<bool>(), prop::sample::select(vec![0u32, 1, 10, 40, 48, 70, 72, 99])), 1..300),
        shift in 0usize..300,
    ) {
        let m = LabelMapping::semantic_kitti();
        let (p, t): (Vec<bool>, Vec<u32>) = pairs.iter().copied().unzip();
        let a = confusion_counts(&p, &t, &m).unwrap();
        let mut rotated = pairs.clone();
        rotated.rotate_left(shift % pairs.len());
        let (p, t): (Vec<bool>, Vec<u32>) = rotated.into_iter().unzip();
        prop_assert_eq!(confusion_counts(&p, &t, &m).unwrap(), a);
    }

    #[test]
    fn config_text_round_trips(
        grid in arb_grid(),
        slope_deg in 1.0..20.0f64, t_dr in 1.0..30.0f64, t_z in 0.01..0.5f64,
        sigma_r in 0.001..0.1f64, sigma_phi in 0.001..0.2f64, sigma_theta in 0.001..0.2f64,
        h in 0.3..3.0f64, k in 0.1..3.0f64, traditional in any::<bool>(), wrap in any::<bool>(), ego in any::<bool>(),
    ) {
        let mut c = SegmentationConfig::with_sensor(
            SensorModel::from_degrees(sigma_r, sigma_phi, sigma_theta, h, -h + 0.3).with_k_sigma(k),
        );
        c.grid = grid;
        c.labeling.t_delta_slope = slope_deg.to_radians().tan();
        c.labeling.t_delta_r = t_dr;
        c.labeling.slope_mode = if traditional { SlopeMode::Traditional } else { SlopeMode::Adaptive };
        c.labeling.cgp_wrap_azimuth = wrap;
        c.classify.t_z = t_z;
        if ego {
            c.ego_box = Some(EgoBox { min: Point3::new(-2.5, -1.1, -2.0), max: Point3::new(1.7, 1.1, 0.4) });
        }
        let text = config_to_string(&c);
        let back = parse_config(&text).unwrap();
        prop_assert_eq!(&back, &c, "{}", text);
        prop_assert_eq!(config_to_string(&back), text);
    }

    #[test]
    fn scan_and_label_files_round_trip(
        pts in prop::collection::vec((-80.0f32..80.0, -80.0f32..80.0, -5.0f32..5.0, 0.0f32..1.0), 0..200),
        labels in prop::collection::vec(any::<u32>(), 0..200),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("s.bin");
        let points: Vec<Point3> = pts.iter().map(|&(x, y, z, _)| Point3::new(x as f64, y as f64, z as f64)).collect();
        let intensity: Vec<f32> = pts.iter().map(|p| p.3).collect();
        write_point_cloud_bin(&bin, &points, Some(&intensity)).unwrap();
        let back = read_point_cloud_bin(&bin).unwrap();
        prop_assert_eq!(&back.points, &points);
        prop_assert_eq!(back.intensity.as_deref(), Some(intensity.as_slice()));

        let lab = dir.path().join("s.label");
        let semantic: Vec<u32> = labels.iter().map(|l| l & 0xFFFF).collect();
        write_labels(&lab, &semantic).unwrap();
        prop_assert_eq!(read_labels(&lab).unwrap(), semantic);
        // instance ids in the upper half are dropped on read
        let raw: Vec<u8> = labels.iter().flat_map(|l| l.to_le_bytes()).collect();
        std::fs::write(&lab, raw).unwrap();
        let masked: Vec<u32> = labels.iter().map(|l| l & 0xFFFF).collect();
        prop_assert_eq!(read_labels(&lab).unwrap(), masked);
    }
}

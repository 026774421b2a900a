// SPDX-License-Identifier: Apache-2.0

//! One-scan orchestration: ego filter, grid mapping, cell labeling,
//! elevation estimation and point classification.

use std::time::Instant;

use crate::elevation::{classify_points, estimate_elevation, ClassifyThresholds, NodeHeightMap};
use crate::error::{Error, Result};
use crate::geometry::{Point3, SensorModel};
use crate::grid::{build_grid_masked, CellLabel, GridConfig, PolarGrid};
use crate::labeling::{label_grid, LabelThresholds};

/// Axis-aligned box around the sensor whose returns are self-reflections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoBox {
    pub min: Point3,
    pub max: Point3,
}

impl EgoBox {
    /// Strict interior test: points on a face are kept.
    #[inline]
    pub fn contains(&self, p: &Point3) -> bool {
        p.x > self.min.x
            && p.x < self.max.x
            && p.y > self.min.y
            && p.y < self.max.y
            && p.z > self.min.z
            && p.z < self.max.z
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite())
            || self.min.x >= self.max.x
            || self.min.y >= self.max.y
            || self.min.z >= self.max.z
        {
            return Err(Error::config("ego box needs min < max on every axis"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationConfig {
    pub sensor: SensorModel,
    pub grid: GridConfig,
    pub labeling: LabelThresholds,
    pub classify: ClassifyThresholds,
    pub ego_box: Option<EgoBox>,
}

impl SegmentationConfig {
    /// Default algorithmic parameters for the given sensor: 3 deg segments,
    /// 80 cells over [0.5, 80) m, slope-change limit tan 7 deg, 10 m
    /// baseline limit, 0.15 m height tolerance.
    pub fn with_sensor(sensor: SensorModel) -> Self {
        Self {
            sensor,
            grid: GridConfig::equidistant_deg(3.0, 80, 0.5, 80.0).expect("default grid"),
            labeling: LabelThresholds::default(),
            classify: ClassifyThresholds::default(),
            ego_box: None,
        }
    }

    pub fn hdl64e() -> Self {
        Self::with_sensor(SensorModel::hdl64e())
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        self.labeling.validate()?;
        self.classify.validate()?;
        if let Some(b) = &self.ego_box {
            b.validate()?;
        }
        Ok(())
    }
}

/// Wall-clock microseconds per stage.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub pgm_us: f64,
    pub ugl_us: f64,
    pub ege_us: f64,
    pub pgs_us: f64,
    pub total_us: f64,
}

impl StageTimings {
    pub fn stage_sum_us(&self) -> f64 {
        self.pgm_us + self.ugl_us + self.ege_us + self.pgs_us
    }
}

#[derive(Debug, Clone)]
pub struct SegmentationResult {
    /// Per-point ground flag, in scan order.
    pub ground: Vec<bool>,
    /// Interpolated ground elevation for points in ground-like cells.
    pub elevation: Vec<Option<f64>>,
    /// Final cell labels, segment-major (`i * M + j`).
    pub cell_labels: Vec<CellLabel>,
    pub num_segments: usize,
    pub num_cells: usize,
    pub nodes: NodeHeightMap,
    pub out_of_range: usize,
    pub ego_filtered: usize,
    pub timings: StageTimings,
}

impl SegmentationResult {
    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn num_ground(&self) -> usize {
        self.ground.iter().filter(|&&g| g).count()
    }

    pub fn cell_label(&self, i: usize, j: usize) -> CellLabel {
        self.cell_labels[i * self.num_cells + j]
    }

    /// Equality of every output except timings, comparing floats bitwise.
    pub fn same_output(&self, other: &Self) -> bool {
        let bits = |v: &Option<f64>| v.map(f64::to_bits);
        self.ground == other.ground
            && self.cell_labels == other.cell_labels
            && self.elevation.iter().map(bits).eq(other.elevation.iter().map(bits))
            && self.out_of_range == other.out_of_range
            && self.ego_filtered == other.ego_filtered
            && (0..self.nodes.num_segments()).all(|i| {
                (0..self.nodes.num_rows()).all(|j| bits(&self.nodes.height(i, j)) == bits(&other.nodes.height(i, j)))
            })
    }
}

/// Flags points strictly inside the ego box.
pub fn apply_ego_filter(scan: &[Point3], ego_box: Option<&EgoBox>) -> Vec<bool> {
    match ego_box {
        Some(b) => scan.iter().map(|p| b.contains(p)).collect(),
        None => vec![false; scan.len()],
    }
}

/// Intermediate state of one run, exposed for inspection and tests.
pub struct ScanStages {
    pub grid: PolarGrid,
    pub result: SegmentationResult,
}

/// Reusable segmenter bound to one validated configuration.
#[derive(Debug, Clone)]
pub struct Segmenter {
    config: SegmentationConfig,
}

impl Segmenter {
    pub fn new(config: SegmentationConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn config(&self) -> &SegmentationConfig {
        &self.config
    }

    pub fn segment(&self, scan: &[Point3]) -> Result<SegmentationResult> {
        self.segment_with_stages(scan).map(|s| s.result)
    }

    pub fn segment_with_stages(&self, scan: &[Point3]) -> Result<ScanStages> {
        if scan.is_empty() {
            return Err(Error::EmptyScan);
        }
        let cfg = &self.config;
        let start = Instant::now();

        let excluded = cfg.ego_box.as_ref().map(|b| apply_ego_filter(scan, Some(b)));
        let (mut grid, out_of_range) = build_grid_masked(scan, &cfg.grid, excluded.as_deref());
        let t_pgm = Instant::now();

        label_grid(&mut grid, &cfg.sensor, &cfg.labeling);
        let t_ugl = Instant::now();

        let nodes = estimate_elevation(&mut grid);
        let t_ege = Instant::now();

        let classified = classify_points(&grid, &nodes, scan, &cfg.classify);
        let t_pgs = Instant::now();

        let us = |a: Instant, b: Instant| (b - a).as_secs_f64() * 1e6;
        let timings = StageTimings {
            pgm_us: us(start, t_pgm),
            ugl_us: us(t_pgm, t_ugl),
            ege_us: us(t_ugl, t_ege),
            pgs_us: us(t_ege, t_pgs),
            total_us: us(start, Instant::now()),
        };
        let result = SegmentationResult {
            ground: classified.ground,
            elevation: classified.elevation,
            cell_labels: grid.cell_labels(),
            num_segments: grid.num_segments(),
            num_cells: grid.num_cells(),
            nodes,
            out_of_range: out_of_range.len(),
            ego_filtered: excluded.map_or(0, |m| m.iter().filter(|&&e| e).count()),
            timings,
        };
        Ok(ScanStages { grid, result })
    }
}

/// Segment one scan with `config`.
pub fn run_scan(scan: &[Point3], config: &SegmentationConfig) -> Result<SegmentationResult> {
    Segmenter::new(config.clone())?.segment(scan)
}

// SPDX-License-Identifier: Apache-2.0

//! Cell-level ground labeling.
//!
//! Labeling runs in two stages. Segment-wise labeling (SGL) picks a ground
//! seed per azimuth segment and grows ground radially outward, then walks
//! back toward the sensor. Cross-segment propagation (CGP) then spreads
//! ground tangentially along rows to reach occluded or isolated cells.
//!
//! Within a segment, "next" and "previous" cells always mean the nearest
//! non-empty cell in that direction; empty cells are skipped entirely.
//! Propagation along rows uses direct neighbors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{adaptive_slope_of, Measurement, SensorModel};
use crate::grid::{CellLabel, PolarGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeMode {
    #[default]
    Adaptive,
    Traditional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelThresholds {
    /// Maximum slope change (tangent) accepted between consecutive cells.
    pub t_delta_slope: f64,
    /// Maximum XY baseline for forward propagation, meters.
    pub t_delta_r: f64,
    pub slope_mode: SlopeMode,
    /// Let cross-segment propagation wrap across the azimuth seam.
    pub cgp_wrap_azimuth: bool,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self {
            t_delta_slope: 7f64.to_radians().tan(),
            t_delta_r: 10.0,
            slope_mode: SlopeMode::Adaptive,
            cgp_wrap_azimuth: false,
        }
    }
}

impl LabelThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_delta_slope.is_finite() && self.t_delta_slope > 0.0) {
            return Err(Error::config(format!("t_delta_slope must be > 0, got {}", self.t_delta_slope)));
        }
        if !(self.t_delta_r.is_finite() && self.t_delta_r > 0.0) {
            return Err(Error::config(format!("t_delta_r must be > 0, got {}", self.t_delta_r)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrder {
    NearToFar,
    FarToNear,
}

/// The propagation schedule applied after segment-wise labeling.
pub const CGP_SCHEDULE: [(Direction, RowOrder); 4] = [
    (Direction::LeftToRight, RowOrder::NearToFar),
    (Direction::RightToLeft, RowOrder::NearToFar),
    (Direction::LeftToRight, RowOrder::FarToNear),
    (Direction::RightToLeft, RowOrder::FarToNear),
];

/// One operand of a cell slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeEnd {
    /// The leveled-ground point below the sensor, `(0, 0, -H_s)`.
    Origin,
    Cell(usize, usize),
}

/// Labels one grid in place. Caches the propagated sigma of every
/// representative point so each slope is a handful of flops.
pub struct GroundLabeler<'g> {
    grid: &'g mut PolarGrid,
    thresholds: LabelThresholds,
    origin: Measurement,
    seed_height_threshold: f64,
    measurements: Vec<Option<Measurement>>,
}

impl<'g> GroundLabeler<'g> {
    pub fn new(grid: &'g mut PolarGrid, sensor: &SensorModel, thresholds: &LabelThresholds) -> Self {
        let measurements = grid
            .cells()
            .iter()
            .map(|c| {
                c.rep.map(|rep| match thresholds.slope_mode {
                    SlopeMode::Adaptive => {
                        Measurement::observe(rep.point, sensor).unwrap_or(Measurement::exact(rep.point))
                    }
                    SlopeMode::Traditional => Measurement::exact(rep.point),
                })
            })
            .collect();
        Self {
            grid,
            thresholds: *thresholds,
            origin: sensor.virtual_origin(),
            seed_height_threshold: sensor.seed_height_threshold,
            measurements,
        }
    }

    pub fn grid(&self) -> &PolarGrid {
        self.grid
    }

    fn measurement(&self, end: SlopeEnd) -> Option<&Measurement> {
        match end {
            SlopeEnd::Origin => Some(&self.origin),
            SlopeEnd::Cell(i, j) => self.measurements[self.grid.flat_index(i, j)].as_ref(),
        }
    }

    /// Slope from `a` to `b` over their representative points.
    pub fn cell_slope(&self, a: SlopeEnd, b: SlopeEnd) -> Result<f64> {
        let (Some(ma), Some(mb)) = (self.measurement(a), self.measurement(b)) else {
            return Err(Error::config("slope requested for an empty cell"));
        };
        slope_between(ma, mb, self.thresholds.slope_mode)
    }

    /// Infallible variant for cells known to be non-empty. Distinct cells
    /// never share an XY position, so a zero baseline cannot occur here; a
    /// NaN would fail every threshold test.
    #[inline]
    fn slope(&self, a: SlopeEnd, b: SlopeEnd) -> f64 {
        self.cell_slope(a, b).unwrap_or(f64::NAN)
    }

    #[inline]
    fn label(&self, i: usize, j: usize) -> CellLabel {
        self.grid.label(i, j)
    }

    fn non_empty_cells(&self, i: usize) -> Vec<usize> {
        (0..self.grid.num_cells()).filter(|&j| !self.grid.cell(i, j).is_empty()).collect()
    }

    /// First cell of segment `i`, near to far, that qualifies as a ground seed.
    pub fn select_seed(&self, i: usize) -> Option<usize> {
        let cells = self.non_empty_cells(i);
        self.select_seed_in(i, &cells)
    }

    fn select_seed_in(&self, i: usize, cells: &[usize]) -> Option<usize> {
        let t = self.thresholds.t_delta_slope;
        for (k, &j) in cells.iter().enumerate() {
            let z = self.grid.cell(i, j).rep.expect("non-empty").point.z;
            if !(z < self.seed_height_threshold) {
                continue;
            }
            let s0 = self.slope(SlopeEnd::Origin, SlopeEnd::Cell(i, j));
            if !(s0.abs() < t) {
                continue;
            }
            if let Some(&next) = cells.get(k + 1) {
                let s1 = self.slope(SlopeEnd::Cell(i, j), SlopeEnd::Cell(i, next));
                if !((s0 - s1).abs() < t) {
                    continue;
                }
            }
            return Some(j);
        }
        None
    }

    /// Forward and backward labeling of segment `i` from `seed`.
    pub fn label_segment(&mut self, i: usize, seed: usize) {
        let cells = self.non_empty_cells(i);
        self.label_segment_in(i, seed, &cells);
    }

    fn label_segment_in(&mut self, i: usize, seed: usize, cells: &[usize]) {
        let t = self.thresholds.t_delta_slope;
        let Some(seed_pos) = cells.iter().position(|&j| j == seed) else {
            return;
        };
        self.grid.set_label(i, seed, CellLabel::Ground);

        // forward
        let mut last = seed;
        let mut s_last = self.slope(SlopeEnd::Origin, SlopeEnd::Cell(i, seed));
        let mut last_pos = seed_pos;
        for (pos, &j) in cells.iter().enumerate().skip(seed_pos + 1) {
            let a = self.grid.cell(i, last).rep.expect("non-empty").point;
            let b = self.grid.cell(i, j).rep.expect("non-empty").point;
            if !(a.xy_distance(&b) < self.thresholds.t_delta_r) {
                continue;
            }
            let s = self.slope(SlopeEnd::Cell(i, last), SlopeEnd::Cell(i, j));
            let label = if (s_last - s).abs() < t {
                last = j;
                last_pos = pos;
                s_last = s;
                CellLabel::Ground
            } else if s < 0.0 {
                CellLabel::NoisyGround
            } else {
                CellLabel::Object
            };
            self.grid.set_label(i, j, label);
        }

        // backward, requiring the two nearest farther cells to be ground
        for pos in (0..last_pos).rev() {
            let j = cells[pos];
            if self.label(i, j) == CellLabel::Ground {
                continue;
            }
            let (Some(&n1), Some(&n2)) = (cells.get(pos + 1), cells.get(pos + 2)) else {
                continue;
            };
            if self.label(i, n1) != CellLabel::Ground || self.label(i, n2) != CellLabel::Ground {
                continue;
            }
            let s_ref = self.slope(SlopeEnd::Cell(i, n2), SlopeEnd::Cell(i, n1));
            let s = self.slope(SlopeEnd::Cell(i, n1), SlopeEnd::Cell(i, j));
            let label = if (s_ref - s).abs() < t {
                CellLabel::Ground
            } else if s < 0.0 {
                CellLabel::NoisyGround
            } else {
                CellLabel::Object
            };
            self.grid.set_label(i, j, label);
        }
    }

    /// Segment-wise labeling of every segment.
    pub fn run_segment_labeling(&mut self) {
        for i in 0..self.grid.num_segments() {
            let cells = self.non_empty_cells(i);
            if let Some(seed) = self.select_seed_in(i, &cells) {
                self.label_segment_in(i, seed, &cells);
            }
        }
    }

    /// Slope along segment `i` between cell `j` and a ground neighbor in the
    /// adjacent row; the nearer neighbor is consulted first.
    pub fn slope_vertical(&self, i: usize, j: usize) -> Option<f64> {
        if j >= 1 && self.label(i, j - 1) == CellLabel::Ground {
            return Some(self.slope(SlopeEnd::Cell(i, j - 1), SlopeEnd::Cell(i, j)));
        }
        if j + 1 < self.grid.num_cells() && self.label(i, j + 1) == CellLabel::Ground {
            return Some(self.slope(SlopeEnd::Cell(i, j), SlopeEnd::Cell(i, j + 1)));
        }
        None
    }

    /// One tangential propagation sweep over all rows.
    pub fn propagate_cross_segment(&mut self, direction: Direction, order: RowOrder) {
        let l = self.grid.num_segments();
        let m = self.grid.num_cells();
        let wrap = self.thresholds.cgp_wrap_azimuth;
        let t = self.thresholds.t_delta_slope;

        // (cell, previous, one before previous) in sweep order
        let triples: Vec<(usize, usize, usize)> = match (direction, wrap) {
            (Direction::LeftToRight, false) => (2..l).map(|i| (i, i - 1, i - 2)).collect(),
            (Direction::RightToLeft, false) => (0..l.saturating_sub(2)).rev().map(|i| (i, i + 1, i + 2)).collect(),
            (Direction::LeftToRight, true) => (0..l).map(|i| (i, (i + l - 1) % l, (i + l - 2) % l)).collect(),
            (Direction::RightToLeft, true) => (0..l).rev().map(|i| (i, (i + 1) % l, (i + 2) % l)).collect(),
        };
        let rows: Vec<usize> = match order {
            RowOrder::NearToFar => (0..m).collect(),
            RowOrder::FarToNear => (0..m).rev().collect(),
        };

        for &j in &rows {
            for &(i, p1, p2) in &triples {
                if self.label(p1, j) != CellLabel::Ground {
                    continue;
                }
                let current = self.label(i, j);
                if current == CellLabel::Ground || current == CellLabel::Empty {
                    continue;
                }
                let s_h = self.slope(SlopeEnd::Cell(p1, j), SlopeEnd::Cell(i, j));
                let horizontal = self.label(p2, j) == CellLabel::Ground
                    && (self.slope(SlopeEnd::Cell(p2, j), SlopeEnd::Cell(p1, j)) - s_h).abs() < t;
                let vertical = || match (self.slope_vertical(p1, j), self.slope_vertical(i, j)) {
                    (Some(a), Some(b)) => (a - b).abs() < t,
                    _ => false,
                };
                if horizontal || vertical() {
                    self.grid.set_label(i, j, CellLabel::Ground);
                }
            }
        }
    }

    /// The four-pass propagation schedule.
    pub fn run_cross_segment_propagation(&mut self) {
        for (direction, order) in CGP_SCHEDULE {
            self.propagate_cross_segment(direction, order);
        }
    }

    /// Remaining unlabeled non-empty cells become objects.
    pub fn finalize(&mut self) {
        for i in 0..self.grid.num_segments() {
            for j in 0..self.grid.num_cells() {
                if self.label(i, j) == CellLabel::Unknown {
                    self.grid.set_label(i, j, CellLabel::Object);
                }
            }
        }
    }
}

pub(crate) fn slope_between(a: &Measurement, b: &Measurement, mode: SlopeMode) -> Result<f64> {
    match mode {
        SlopeMode::Adaptive => adaptive_slope_of(a, b),
        SlopeMode::Traditional => crate::geometry::traditional_slope(&a.point, &b.point),
    }
}

/// Full cell labeling: SGL on every segment, the CGP schedule, then
/// finalization of unreached cells.
pub fn label_grid(grid: &mut PolarGrid, sensor: &SensorModel, thresholds: &LabelThresholds) {
    let mut labeler = GroundLabeler::new(grid, sensor, thresholds);
    labeler.run_segment_labeling();
    labeler.run_cross_segment_propagation();
    labeler.finalize();
}

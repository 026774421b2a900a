// SPDX-License-Identifier: Apache-2.0

//! Polar grid mapping: `L` equal azimuth segments by `M` radial cells.
//!
//! Segment index of a point is `floor((pi - atan2(y, x)) / delta_alpha)`, so
//! segment 0 starts at the negative X axis and indices grow clockwise when
//! viewed from above. Cell `j` covers radii `[r_j, r_{j+1})`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// How the `[r0, r_max)` interval is split into radial cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum RadialDivision {
    /// `M` cells of equal radial length.
    #[default]
    Equidistant,
    /// Cell length grows linearly, starting at `d0` for the first cell.
    Linear { d0: f64 },
    /// Explicit boundaries, `r0` first and `r_max` last.
    Manual { boundaries: Vec<f64> },
}

impl RadialDivision {
    /// Piecewise-equidistant 14-cell division over four concentric zones with
    /// 2, 4, 4 and 4 rings. Zone limits sit at `r0`, `(7 r0 + r_max) / 8`,
    /// `(3 r0 + r_max) / 4`, `(r0 + r_max) / 2` and `r_max`.
    pub fn concentric_zones(r0: f64, r_max: f64) -> Self {
        let limits = [
            r0,
            (7.0 * r0 + r_max) / 8.0,
            (3.0 * r0 + r_max) / 4.0,
            (r0 + r_max) / 2.0,
            r_max,
        ];
        let rings = [2usize, 4, 4, 4];
        let mut boundaries = vec![r0];
        for (zone, &n) in rings.iter().enumerate() {
            let (lo, hi) = (limits[zone], limits[zone + 1]);
            for k in 1..=n {
                boundaries.push(if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 });
            }
        }
        RadialDivision::Manual { boundaries }
    }
}

/// Validated polar grid layout.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    delta_alpha: f64,
    num_segments: usize,
    r0: f64,
    r_max: f64,
    division: RadialDivision,
    boundaries: Vec<f64>,
    /// 1 / cell length for the equidistant fast path.
    inv_step: f64,
}

impl GridConfig {
    /// `num_cells` is ignored for [`RadialDivision::Manual`], which derives it
    /// from the boundary list.
    pub fn new(
        delta_alpha: f64,
        num_cells: usize,
        r0: f64,
        r_max: f64,
        division: RadialDivision,
    ) -> Result<Self> {
        if !(delta_alpha.is_finite() && delta_alpha > 0.0 && delta_alpha <= TAU) {
            return Err(Error::config(format!("delta_alpha out of range: {delta_alpha}")));
        }
        let segments = TAU / delta_alpha;
        let num_segments = segments.round();
        if (segments - num_segments).abs() > 1e-9 {
            return Err(Error::config(format!(
                "angular resolution {:.6} deg does not divide 360 deg",
                delta_alpha.to_degrees()
            )));
        }
        if !(r0.is_finite() && r_max.is_finite() && r0 >= 0.0 && r0 < r_max) {
            return Err(Error::config(format!("need 0 <= r0 < r_max, got r0={r0} r_max={r_max}")));
        }
        let boundaries = match &division {
            RadialDivision::Equidistant => {
                check_cells(num_cells)?;
                let step = (r_max - r0) / num_cells as f64;
                let mut b: Vec<f64> = (0..=num_cells).map(|j| r0 + j as f64 * step).collect();
                b[num_cells] = r_max;
                b
            }
            RadialDivision::Linear { d0 } => {
                check_cells(num_cells)?;
                linear_boundaries(num_cells, *d0, r0, r_max)?
            }
            RadialDivision::Manual { boundaries } => {
                if boundaries.len() < 3 {
                    return Err(Error::config("manual division needs at least 2 cells"));
                }
                if boundaries[0] != r0 || *boundaries.last().unwrap() != r_max {
                    return Err(Error::config("manual boundaries must start at r0 and end at r_max"));
                }
                if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::config("manual boundaries must be strictly increasing"));
                }
                boundaries.clone()
            }
        };
        let num_cells = boundaries.len() - 1;
        Ok(Self {
            delta_alpha: TAU / num_segments,
            num_segments: num_segments as usize,
            r0,
            r_max,
            inv_step: num_cells as f64 / (r_max - r0),
            division,
            boundaries,
        })
    }

    /// Grid with angles given in degrees and equidistant cells.
    pub fn equidistant_deg(delta_alpha_deg: f64, num_cells: usize, r0: f64, r_max: f64) -> Result<Self> {
        Self::new(delta_alpha_deg.to_radians(), num_cells, r0, r_max, RadialDivision::Equidistant)
    }

    pub fn delta_alpha(&self) -> f64 {
        self.delta_alpha
    }
    pub fn num_segments(&self) -> usize {
        self.num_segments
    }
    pub fn num_cells(&self) -> usize {
        self.boundaries.len() - 1
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn division(&self) -> &RadialDivision {
        &self.division
    }
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// Boundary radius `r_j` for `0 <= j <= M`.
    pub fn radius(&self, j: usize) -> f64 {
        self.boundaries[j]
    }

    /// Inner and outer radius of cell `j < M`.
    pub fn radial_bounds(&self, j: usize) -> (f64, f64) {
        (self.boundaries[j], self.boundaries[j + 1])
    }

    /// Azimuth coordinate `pi - atan2(y, x)` in `[0, 2 pi]`.
    #[inline]
    pub fn azimuth_of(x: f64, y: f64) -> f64 {
        PI - y.atan2(x)
    }

    #[inline]
    pub fn segment_of_azimuth(&self, u: f64) -> usize {
        let i = (u / self.delta_alpha).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.num_segments - 1)
        }
    }

    /// Radial cell containing `r`, or `None` outside `[r0, r_max)`.
    #[inline]
    pub fn cell_of_range(&self, r: f64) -> Option<usize> {
        if !(r >= self.r0 && r < self.r_max) {
            return None;
        }
        let b = &self.boundaries;
        let last = b.len() - 2;
        match self.division {
            RadialDivision::Equidistant => {
                let mut j = (((r - self.r0) * self.inv_step) as usize).min(last);
                while j > 0 && r < b[j] {
                    j -= 1;
                }
                while j < last && r >= b[j + 1] {
                    j += 1;
                }
                Some(j)
            }
            _ => Some(b.partition_point(|&bj| bj <= r) - 1),
        }
    }

    pub fn cell_index(&self, p: &Point3) -> Option<(usize, usize)> {
        let j = self.cell_of_range(p.horizontal_range())?;
        Some((self.segment_of_azimuth(Self::azimuth_of(p.x, p.y)), j))
    }
}

fn check_cells(num_cells: usize) -> Result<()> {
    if num_cells < 2 {
        return Err(Error::config(format!("need at least 2 radial cells, got {num_cells}")));
    }
    Ok(())
}

/// Boundaries `D(j) = a/2 j^2 + b j + c` with `D(0) = r0`, `D(M) = r_max`
/// and initial cell length `d(0) = b = d0`.
fn linear_boundaries(m: usize, d0: f64, r0: f64, r_max: f64) -> Result<Vec<f64>> {
    if !(d0.is_finite() && d0 > 0.0) {
        return Err(Error::config(format!("d0 must be > 0, got {d0}")));
    }
    let mf = m as f64;
    let span = r_max - r0;
    if d0 * mf > span {
        return Err(Error::NegativeGrowth(d0 * mf, span));
    }
    let a = 2.0 * (span - d0 * mf) / (mf * mf);
    let mut b: Vec<f64> = (0..=m)
        .map(|j| {
            let j = j as f64;
            0.5 * a * j * j + d0 * j + r0
        })
        .collect();
    b[m] = r_max;
    Ok(b)
}

/// Cell-level classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[repr(u8)]
pub enum CellLabel {
    #[default]
    Empty = 0,
    Unknown = 1,
    Ground = 2,
    NoisyGround = 3,
    Object = 4,
}

impl CellLabel {
    pub fn is_ground_like(self) -> bool {
        matches!(self, CellLabel::Ground | CellLabel::NoisyGround)
    }
}

/// Lowest point of a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Representative {
    pub index: usize,
    pub point: Point3,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Cell {
    pub rep: Option<Representative>,
    pub label: CellLabel,
    /// Estimated ground height for noisy-ground cells.
    pub est_ground_z: Option<f64>,
    start: u32,
    len: u32,
}

impl Cell {
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
    pub fn num_points(&self) -> usize {
        self.len as usize
    }
    pub fn rep_point(&self) -> Option<&Point3> {
        self.rep.as_ref().map(|r| &r.point)
    }
}

const NO_CELL: u32 = u32::MAX;

/// Dense `L x M` cell lattice built from one scan.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    config: GridConfig,
    cells: Vec<Cell>,
    /// Scan indices grouped by cell, in scan order within a cell.
    members: Vec<u32>,
    /// Flat cell id per scan point, `NO_CELL` when unassigned.
    point_cell: Vec<u32>,
    /// `pi - atan2(y, x)` per scan point (NaN when unassigned).
    point_azimuth: Vec<f64>,
    /// Horizontal range per scan point (NaN when unassigned).
    point_range: Vec<f64>,
}

/// Build the grid. Points outside `[r0, r_max)` are returned separately.
pub fn build_grid(scan: &[Point3], config: &GridConfig) -> (PolarGrid, Vec<usize>) {
    build_grid_masked(scan, config, None)
}

/// As [`build_grid`], skipping points whose `excluded` flag is set. Excluded
/// points appear neither in a cell nor in the out-of-range list.
pub fn build_grid_masked(
    scan: &[Point3],
    config: &GridConfig,
    excluded: Option<&[bool]>,
) -> (PolarGrid, Vec<usize>) {
    let m = config.num_cells();
    let num_cells = config.num_segments() * m;
    assert!(scan.len() < NO_CELL as usize, "scan too large");

    let mut point_cell = vec![NO_CELL; scan.len()];
    let mut point_azimuth = vec![f64::NAN; scan.len()];
    let mut point_range = vec![f64::NAN; scan.len()];
    let mut counts = vec![0u32; num_cells + 1];
    let mut out_of_range = Vec::new();

    for (k, p) in scan.iter().enumerate() {
        if excluded.is_some_and(|mask| mask[k]) {
            continue;
        }
        let r = p.horizontal_range();
        let Some(j) = config.cell_of_range(r) else {
            out_of_range.push(k);
            continue;
        };
        let u = GridConfig::azimuth_of(p.x, p.y);
        let id = config.segment_of_azimuth(u) * m + j;
        point_cell[k] = id as u32;
        point_azimuth[k] = u;
        point_range[k] = r;
        counts[id + 1] += 1;
    }

    // counting sort, stable in scan order
    for c in 1..=num_cells {
        counts[c] += counts[c - 1];
    }
    let mut cells: Vec<Cell> = (0..num_cells)
        .map(|c| Cell {
            start: counts[c],
            len: counts[c + 1] - counts[c],
            ..Cell::default()
        })
        .collect();
    let mut members = vec![0u32; counts[num_cells] as usize];
    let mut cursor = counts;
    for (k, &id) in point_cell.iter().enumerate() {
        if id == NO_CELL {
            continue;
        }
        let id = id as usize;
        members[cursor[id] as usize] = k as u32;
        cursor[id] += 1;
        let cell = &mut cells[id];
        let p = scan[k];
        // strict comparison keeps the first-seen point on ties
        if cell.rep.is_none_or(|rep| p.z < rep.point.z) {
            cell.rep = Some(Representative { index: k, point: p });
            cell.label = CellLabel::Unknown;
        }
    }

    let grid = PolarGrid {
        config: config.clone(),
        cells,
        members,
        point_cell,
        point_azimuth,
        point_range,
    };
    (grid, out_of_range)
}

impl PolarGrid {
    pub fn config(&self) -> &GridConfig {
        &self.config
    }
    pub fn num_segments(&self) -> usize {
        self.config.num_segments()
    }
    pub fn num_cells(&self) -> usize {
        self.config.num_cells()
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        i * self.config.num_cells() + j
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[self.flat_index(i, j)]
    }

    #[inline]
    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut Cell {
        let idx = self.flat_index(i, j);
        &mut self.cells[idx]
    }

    #[inline]
    pub fn label(&self, i: usize, j: usize) -> CellLabel {
        self.cell(i, j).label
    }

    #[inline]
    pub fn set_label(&mut self, i: usize, j: usize, label: CellLabel) {
        self.cell_mut(i, j).label = label;
    }

    /// All cells in segment-major order (`i * M + j`).
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell_labels(&self) -> Vec<CellLabel> {
        self.cells.iter().map(|c| c.label).collect()
    }

    /// Scan indices of the points binned into cell `(i, j)`.
    pub fn point_indices(&self, i: usize, j: usize) -> &[u32] {
        let c = self.cell(i, j);
        &self.members[c.start as usize..(c.start + c.len) as usize]
    }

    /// `(i, j)` of scan point `k`, if it was binned.
    pub fn cell_of_point(&self, k: usize) -> Option<(usize, usize)> {
        let id = *self.point_cell.get(k)?;
        (id != NO_CELL).then(|| {
            let m = self.config.num_cells();
            (id as usize / m, id as usize % m)
        })
    }

    /// Cached `(azimuth, horizontal range)` of a binned scan point.
    pub fn point_polar(&self, k: usize) -> Option<(f64, f64)> {
        (self.point_cell.get(k).copied()? != NO_CELL).then(|| (self.point_azimuth[k], self.point_range[k]))
    }

    pub fn scan_len(&self) -> usize {
        self.point_cell.len()
    }
}

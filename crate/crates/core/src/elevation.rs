// SPDX-License-Identifier: Apache-2.0

//! Ground elevation estimation and point-level classification.
//!
//! Heights live on the polar grid's corner nodes: node `(i, j)` sits at
//! radius `r_j` on the azimuth boundary between segments `i - 1` and `i`.
//! Cell `(i, j)` is spanned by nodes `(i, j)`, `(i + 1, j)`, `(i, j + 1)` and
//! `(i + 1, j + 1)`, with `i + 1` wrapping at the seam.
//!
//! 1. Nodes touching ground cells take the `exp(-d)`-weighted mean of the
//!    adjacent ground representatives.
//! 2. Noisy-ground cells get a ground height from up to four sweeps (along
//!    the row both ways, along the segment both ways), each carrying the
//!    last ground cell's Z.
//! 3. Nodes touching only noisy-ground cells use step 2's estimates.

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::grid::{CellLabel, GridConfig, PolarGrid};

/// Heights at the `L x (M + 1)` grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeHeightMap {
    num_segments: usize,
    num_rows: usize,
    heights: Vec<Option<f64>>,
    positions: Vec<(f64, f64)>,
}

impl NodeHeightMap {
    /// All nodes undefined, positions taken from `config`.
    pub fn undefined(config: &GridConfig) -> Self {
        let l = config.num_segments();
        let rows = config.num_cells() + 1;
        let mut positions = Vec::with_capacity(l * rows);
        for i in 0..l {
            // atan2 angle of the boundary is pi - i * delta_alpha
            let (s, c) = (i as f64 * config.delta_alpha()).sin_cos();
            for j in 0..rows {
                let r = config.radius(j);
                positions.push((-r * c, r * s));
            }
        }
        Self {
            num_segments: l,
            num_rows: rows,
            heights: vec![None; l * rows],
            positions,
        }
    }

    pub fn num_segments(&self) -> usize {
        self.num_segments
    }
    /// `M + 1`.
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.num_rows + j
    }

    pub fn height(&self, i: usize, j: usize) -> Option<f64> {
        self.heights[self.idx(i, j)]
    }

    pub fn set_height(&mut self, i: usize, j: usize, h: Option<f64>) {
        let k = self.idx(i, j);
        self.heights[k] = h;
    }

    /// XY position of node `(i, j)`.
    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        self.positions[self.idx(i, j)]
    }

    pub fn num_defined(&self) -> usize {
        self.heights.iter().filter(|h| h.is_some()).count()
    }

    /// Corner nodes of cell `(i, j)` as `[bl, br, tl, tr]`.
    pub fn cell_nodes(&self, i: usize, j: usize) -> [(usize, usize); 4] {
        let i1 = (i + 1) % self.num_segments;
        [(i, j), (i1, j), (i, j + 1), (i1, j + 1)]
    }
}

/// Weighted node heights from the cells matching `select`, writing only
/// nodes that are still undefined.
fn accumulate_nodes(grid: &PolarGrid, nodes: &mut NodeHeightMap, select: impl Fn(&crate::grid::Cell) -> Option<f64>) {
    let n = nodes.heights.len();
    let mut num = vec![0.0f64; n];
    let mut den = vec![0.0f64; n];
    let (l, m) = (grid.num_segments(), grid.num_cells());
    for i in 0..l {
        for j in 0..m {
            let cell = grid.cell(i, j);
            let Some(z) = select(cell) else { continue };
            let rep = cell.rep.expect("labeled cell has a representative").point;
            for (ni, nj) in nodes.cell_nodes(i, j) {
                let k = nodes.idx(ni, nj);
                if nodes.heights[k].is_some() {
                    continue;
                }
                let (x, y) = nodes.positions[k];
                let d = ((rep.x - x).powi(2) + (rep.y - y).powi(2)).sqrt();
                let w = (-d).exp();
                num[k] += w * z;
                den[k] += w;
            }
        }
    }
    for k in 0..n {
        if nodes.heights[k].is_none() && den[k] > 0.0 {
            nodes.heights[k] = Some(num[k] / den[k]);
        }
    }
}

/// Step 1: heights of nodes adjacent to at least one ground cell.
pub fn ground_node_heights(grid: &PolarGrid) -> NodeHeightMap {
    let mut nodes = NodeHeightMap::undefined(grid.config());
    accumulate_nodes(grid, &mut nodes, |c| {
        (c.label == CellLabel::Ground).then(|| c.rep.expect("ground cell").point.z)
    });
    nodes
}

/// Sweep directions of the Z propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathDirection {
    RowLeftToRight = 0,
    RowRightToLeft = 1,
    SegmentNearToFar = 2,
    SegmentFarToNear = 3,
}

pub const PATH_DIRECTIONS: [PathDirection; 4] = [
    PathDirection::RowLeftToRight,
    PathDirection::RowRightToLeft,
    PathDirection::SegmentNearToFar,
    PathDirection::SegmentFarToNear,
];

/// Ground height carried into a noisy cell from one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZSource {
    pub z: f64,
    /// XY distance between the noisy and source representatives.
    pub distance: f64,
    pub from: (usize, usize),
}

/// Per-cell propagated heights, indexed like [`PolarGrid::cells`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatedZ {
    num_cells: usize,
    sources: Vec<[Option<ZSource>; 4]>,
}

impl PropagatedZ {
    pub fn get(&self, i: usize, j: usize, dir: PathDirection) -> Option<ZSource> {
        self.sources[i * self.num_cells + j][dir as usize]
    }

    pub fn sources(&self, i: usize, j: usize) -> &[Option<ZSource>; 4] {
        &self.sources[i * self.num_cells + j]
    }
}

/// Step 2: carry the last ground Z along every row and segment in both
/// directions. Non-ground cells are passed through; each new ground cell
/// replaces the carried value.
pub fn propagate_z_four_paths(grid: &PolarGrid) -> PropagatedZ {
    let (l, m) = (grid.num_segments(), grid.num_cells());
    let mut out = PropagatedZ {
        num_cells: m,
        sources: vec![[None; 4]; l * m],
    };

    let mut sweep = |cells: &mut dyn Iterator<Item = (usize, usize)>, dir: PathDirection| {
        let mut carried: Option<(Point3, (usize, usize))> = None;
        for (i, j) in cells {
            let cell = grid.cell(i, j);
            match cell.label {
                CellLabel::Ground => carried = Some((cell.rep.expect("ground cell").point, (i, j))),
                CellLabel::NoisyGround => {
                    if let Some((src, from)) = carried {
                        let rep = cell.rep.expect("noisy cell").point;
                        out.sources[i * m + j][dir as usize] = Some(ZSource {
                            z: src.z,
                            distance: rep.xy_distance(&src),
                            from,
                        });
                    }
                }
                _ => {}
            }
        }
    };

    for j in 0..m {
        sweep(&mut (0..l).map(|i| (i, j)), PathDirection::RowLeftToRight);
        sweep(&mut (0..l).rev().map(|i| (i, j)), PathDirection::RowRightToLeft);
    }
    for i in 0..l {
        sweep(&mut (0..m).map(|j| (i, j)), PathDirection::SegmentNearToFar);
        sweep(&mut (0..m).rev().map(|j| (i, j)), PathDirection::SegmentFarToNear);
    }
    out
}

/// `exp(-d)`-weighted mean of the available sources.
pub fn weighted_source_height(sources: &[Option<ZSource>]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for s in sources.iter().flatten() {
        let w = (-s.distance).exp();
        num += w * s.z;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Fill `est_ground_z` of every noisy-ground cell. Cells with no source in
/// any direction have no elevation support and become objects.
pub fn estimate_noisy_ground_heights(grid: &mut PolarGrid, propagated: &PropagatedZ) {
    let (l, m) = (grid.num_segments(), grid.num_cells());
    for i in 0..l {
        for j in 0..m {
            if grid.label(i, j) != CellLabel::NoisyGround {
                continue;
            }
            let est = weighted_source_height(propagated.sources(i, j));
            let cell = grid.cell_mut(i, j);
            cell.est_ground_z = est;
            if est.is_none() {
                cell.label = CellLabel::Object;
            }
        }
    }
}

/// Step 3: nodes still undefined after step 1 that touch a noisy-ground
/// cell, using the estimated ground heights.
pub fn noisy_node_heights(grid: &PolarGrid, nodes: &mut NodeHeightMap) {
    accumulate_nodes(grid, nodes, |c| {
        if c.label == CellLabel::NoisyGround {
            c.est_ground_z
        } else {
            None
        }
    });
}

/// Steps 1 to 3 in order; updates noisy-cell estimates on the grid.
pub fn estimate_elevation(grid: &mut PolarGrid) -> NodeHeightMap {
    let mut nodes = ground_node_heights(grid);
    let propagated = propagate_z_four_paths(grid);
    estimate_noisy_ground_heights(grid, &propagated);
    noisy_node_heights(grid, &mut nodes);
    nodes
}

/// Linear corner weights `[bl, br, tl, tr]` from the tangential offset `a1`
/// and radial offset `b1`, both in `[0, 1]` from the lower-index edges.
/// The weights always sum to 4.
#[inline]
pub fn corner_weights(a1: f64, b1: f64) -> [f64; 4] {
    let a2 = 1.0 - a1;
    let b2 = 1.0 - b1;
    [a2 + b2, a1 + b2, a2 + b1, a1 + b1]
}

/// Weights from cached polar coordinates (`u = pi - atan2(y, x)`, `r`).
#[inline]
pub fn interpolation_weights_polar(u: f64, r: f64, i: usize, j: usize, config: &GridConfig) -> [f64; 4] {
    let da = config.delta_alpha();
    let a1 = ((u - i as f64 * da) / da).clamp(0.0, 1.0);
    let (r_in, r_out) = config.radial_bounds(j);
    let b1 = ((r - r_in) / (r_out - r_in)).clamp(0.0, 1.0);
    corner_weights(a1, b1)
}

pub fn interpolation_weights(p: &Point3, cell: (usize, usize), config: &GridConfig) -> [f64; 4] {
    let u = GridConfig::azimuth_of(p.x, p.y);
    interpolation_weights_polar(u, p.horizontal_range(), cell.0, cell.1, config)
}

#[inline]
fn blend(weights: [f64; 4], heights: [f64; 4]) -> f64 {
    let num: f64 = weights.iter().zip(heights).map(|(w, h)| w * h).sum();
    let den: f64 = weights.iter().sum();
    num / den
}

fn corner_heights(nodes: &NodeHeightMap, i: usize, j: usize) -> Result<[f64; 4]> {
    let corners = nodes.cell_nodes(i, j);
    let mut h = [0.0; 4];
    for (slot, (ni, nj)) in h.iter_mut().zip(corners) {
        *slot = nodes.height(ni, nj).ok_or(Error::UnsupportedCell(i, j))?;
    }
    Ok(h)
}

/// Interpolated ground elevation under `p`, which lies in `cell`.
pub fn interpolate_elevation(p: &Point3, cell: (usize, usize), config: &GridConfig, nodes: &NodeHeightMap) -> Result<f64> {
    let h = corner_heights(nodes, cell.0, cell.1)?;
    Ok(blend(interpolation_weights(p, cell, config), h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyThresholds {
    /// Height tolerance around the interpolated elevation, meters.
    pub t_z: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self { t_z: 0.15 }
    }
}

impl ClassifyThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_z.is_finite() && self.t_z > 0.0) {
            return Err(Error::config(format!("t_z must be > 0, got {}", self.t_z)));
        }
        Ok(())
    }
}

/// Per-point output of [`classify_points`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointClassification {
    pub ground: Vec<bool>,
    /// Interpolated elevation for points in ground and noisy-ground cells.
    pub elevation: Vec<Option<f64>>,
}

/// Points in ground cells are ground when below `E + t_z` (below-surface
/// points pass). Points in noisy-ground cells must lie within `t_z` of `E`
/// on either side. Everything else is non-ground.
pub fn classify_points(
    grid: &PolarGrid,
    nodes: &NodeHeightMap,
    scan: &[Point3],
    thresholds: &ClassifyThresholds,
) -> PointClassification {
    let mut out = PointClassification {
        ground: vec![false; scan.len()],
        elevation: vec![None; scan.len()],
    };
    let config = grid.config();
    let t_z = thresholds.t_z;
    for i in 0..grid.num_segments() {
        for j in 0..grid.num_cells() {
            let label = grid.label(i, j);
            if !label.is_ground_like() {
                continue;
            }
            // node invariant: ground and noisy cells always have all corners
            let Ok(h) = corner_heights(nodes, i, j) else { continue };
            for &k in grid.point_indices(i, j) {
                let k = k as usize;
                let (u, r) = grid.point_polar(k).expect("binned point");
                let e = blend(interpolation_weights_polar(u, r, i, j, config), h);
                let z = scan[k].z;
                out.elevation[k] = Some(e);
                out.ground[k] = match label {
                    CellLabel::Ground => z < e + t_z,
                    _ => (z - e).abs() < t_z,
                };
            }
        }
    }
    out
}

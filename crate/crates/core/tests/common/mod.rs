// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

//! Hand-traced labeling fixtures shared by the integration tests.
//!
//! The grid uses 3 deg segments and 1 m cells over [0.5, 80.5), so the
//! representative of cell `j` sits at range `j + 1` and radial neighbors are
//! exactly 1 m apart. Slopes are traditional unless stated otherwise, which
//! keeps every trace checkable by hand. `T_dslope = tan 7 deg ~ 0.1228`.

use polarseg_core::geometry::{Point3, SensorModel};
use polarseg_core::grid::{build_grid, CellLabel, GridConfig, PolarGrid};
use polarseg_core::labeling::{Direction, GroundLabeler, LabelThresholds, RowOrder, SlopeMode};

pub const H: f64 = 1.73;

pub fn grid_config() -> GridConfig {
    GridConfig::equidistant_deg(3.0, 80, 0.5, 80.5).unwrap()
}

pub fn sensor() -> SensorModel {
    SensorModel::hdl64e()
}

pub fn traditional() -> LabelThresholds {
    LabelThresholds {
        slope_mode: SlopeMode::Traditional,
        ..LabelThresholds::default()
    }
}

/// Point at the center of cell `(i, j)` with height `z`.
pub fn cell_point(i: usize, j: usize, z: f64) -> Point3 {
    let cfg = grid_config();
    let u = (i as f64 + 0.5) * cfg.delta_alpha();
    let r = j as f64 + 1.0;
    let a = std::f64::consts::PI - u;
    Point3::new(r * a.cos(), r * a.sin(), z)
}

pub fn grid_of(cells: &[(usize, usize, f64)]) -> PolarGrid {
    let pts: Vec<Point3> = cells.iter().map(|&(i, j, z)| cell_point(i, j, z)).collect();
    let (grid, out) = build_grid(&pts, &grid_config());
    assert!(out.is_empty());
    grid
}

pub fn segment_labels(grid: &PolarGrid, i: usize, js: impl IntoIterator<Item = usize>) -> Vec<CellLabel> {
    js.into_iter().map(|j| grid.label(i, j)).collect()
}

use CellLabel::{Ground as G, NoisyGround as N, Object as O, Unknown as U};

/// A labeling fixture and the labels it must produce.
pub struct Trace {
    pub name: &'static str,
    pub check: fn() -> Result<(), String>,
}

fn expect(name: &str, got: Vec<CellLabel>, want: Vec<CellLabel>) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{name}: got {got:?}, want {want:?}"))
    }
}

fn sgl(cells: &[(usize, usize, f64)]) -> (PolarGrid, Option<usize>) {
    let mut grid = grid_of(cells);
    let seed;
    {
        let mut l = GroundLabeler::new(&mut grid, &sensor(), &traditional());
        seed = l.select_seed(0);
        if let Some(s) = seed {
            l.label_segment(0, s);
        }
    }
    (grid, seed)
}

/// Five flat cells: seed at the first, all ground.
fn flat_segment() -> Result<(), String> {
    let cells: Vec<_> = (2..7).map(|j| (0, j, -H)).collect();
    let (grid, seed) = sgl(&cells);
    expect("flat seed", vec![if seed == Some(2) { G } else { U }], vec![G])?;
    expect("flat", segment_labels(&grid, 0, 2..7), vec![G; 5])
}

/// Step up at cell 5 (z = -1.0): slope 0.73 against s_last = 0 is a
/// positive change, so Object. Cell 6 is compared with the anchor at 4
/// (slope 0 over 2 m) and ground resumes. The backward pass revisits 5
/// with anchors 6 and 7 and reaches the same verdict.
fn step_up() -> Result<(), String> {
    let cells: Vec<_> = (2..10).map(|j| (0, j, if j == 5 { -1.0 } else { -H })).collect();
    let (grid, _) = sgl(&cells);
    expect("step up", segment_labels(&grid, 0, 2..10), vec![G, G, G, O, G, G, G, G])
}

/// Reflection at cell 5 (z = -2.6): slope -0.87, change beyond the limit
/// with a negative slope, so NoisyGround.
fn reflection_below() -> Result<(), String> {
    let cells: Vec<_> = (2..10).map(|j| (0, j, if j == 5 { -2.6 } else { -H })).collect();
    let (grid, _) = sgl(&cells);
    expect("reflection", segment_labels(&grid, 0, 2..10), vec![G, G, G, N, G, G, G, G])
}

/// Vehicle roof over cells 2 and 3 (z = 0 > T_h): the seed is cell 4. The
/// backward pass tests 3 against anchors 4 and 5: slope 1.73, Object. Cell
/// 2's nearer farther neighbor (3) is not ground, so 2 stays unlabeled.
fn roof_then_ground() -> Result<(), String> {
    let cells: Vec<_> = (2..10).map(|j| (0, j, if j < 4 { 0.0 } else { -H })).collect();
    let (grid, seed) = sgl(&cells);
    if seed != Some(4) {
        return Err(format!("roof: seed {seed:?}, want Some(4)"));
    }
    expect("roof", segment_labels(&grid, 0, 2..10), vec![U, O, G, G, G, G, G, G])
}

/// Wall rising at 0.5 m per meter: no cell satisfies the seed conditions.
fn wall_no_seed() -> Result<(), String> {
    let cells: Vec<_> = (2..7).map(|j| (0, j, -H + 0.5 * (j as f64 + 1.0))).collect();
    let (_, seed) = sgl(&cells);
    match seed {
        None => Ok(()),
        Some(s) => Err(format!("wall: unexpected seed {s}")),
    }
}

fn cgp_fixture(cells: &[(usize, usize, f64)], labels: &[(usize, usize, CellLabel)]) -> PolarGrid {
    let mut grid = grid_of(cells);
    for &(i, j, l) in labels {
        grid.set_label(i, j, l);
    }
    grid
}

/// Row 10 over segments 0..8, flat, segment 4 mislabeled Object. Left to
/// right, cell 4 sees ground at 3 and 2 with equal horizontal slopes.
fn cgp_horizontal() -> Result<(), String> {
    let cells: Vec<_> = (0..8).map(|i| (i, 10, -H)).collect();
    let labels: Vec<_> = (0..8).map(|i| (i, 10, if i == 4 { O } else { G })).collect();
    let mut grid = cgp_fixture(&cells, &labels);
    GroundLabeler::new(&mut grid, &sensor(), &traditional())
        .propagate_cross_segment(Direction::LeftToRight, RowOrder::NearToFar);
    expect("cgp horizontal", (0..8).map(|i| grid.label(i, 10)).collect(), vec![G; 8])
}

/// Isolated flat path in segment 2 over rows 3..=8, never seeded. Segment
/// 1 is ground in all rows, segment 0 only in row 3 (a wall stands on rows
/// 4..=8). Row 3 propagates horizontally; rows 4..=8 lack the second
/// horizontal anchor and propagate through the vertical test, each
/// building on the row below it.
fn cgp_vertical_path() -> Result<(), String> {
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for j in 3..=8 {
        let wall = j > 3;
        cells.push((0, j, if wall { 1.0 } else { -H }));
        labels.push((0, j, if wall { O } else { G }));
        cells.push((1, j, -H));
        labels.push((1, j, G));
        cells.push((2, j, -H));
        labels.push((2, j, U));
    }
    let mut grid = cgp_fixture(&cells, &labels);
    GroundLabeler::new(&mut grid, &sensor(), &traditional())
        .propagate_cross_segment(Direction::LeftToRight, RowOrder::NearToFar);
    expect("cgp vertical", segment_labels(&grid, 2, 3..=8), vec![G; 6])?;
    expect("cgp vertical wall", segment_labels(&grid, 0, 4..=8), vec![O; 5])
}

/// A wall cell next to two ground cells keeps its Object label.
fn cgp_wall_stays() -> Result<(), String> {
    let cells = [(0, 5, -H), (1, 5, -H), (2, 5, 1.0)];
    let labels = [(0, 5, G), (1, 5, G), (2, 5, O)];
    let mut grid = cgp_fixture(&cells, &labels);
    GroundLabeler::new(&mut grid, &sensor(), &traditional())
        .propagate_cross_segment(Direction::LeftToRight, RowOrder::NearToFar);
    expect("cgp wall", vec![grid.label(2, 5)], vec![O])
}

pub fn traces() -> Vec<Trace> {
    vec![
        Trace { name: "flat segment", check: flat_segment },
        Trace { name: "step up", check: step_up },
        Trace { name: "reflection below ground", check: reflection_below },
        Trace { name: "roof before ground", check: roof_then_ground },
        Trace { name: "wall without seed", check: wall_no_seed },
        Trace { name: "cross-segment horizontal", check: cgp_horizontal },
        Trace { name: "cross-segment vertical path", check: cgp_vertical_path },
        Trace { name: "cross-segment wall", check: cgp_wall_stays },
    ]
}

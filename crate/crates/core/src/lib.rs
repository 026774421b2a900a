// SPDX-License-Identifier: Apache-2.0

//! Ground segmentation for spinning and solid-state LiDAR scans on a polar
//! grid.
//!
//! A scan goes through four stages: points are binned into azimuth segments
//! and radial cells, cells are labeled ground or object using an
//! uncertainty-aware slope test, a node elevation map is built (with
//! reflection noise below the surface discounted), and each point is finally
//! compared with the elevation interpolated at its position.
//!
//! ```
//! use polarseg_core::{geometry::Point3, pipeline::{run_scan, SegmentationConfig}};
//!
//! // ten flat rings, one point per degree
//! let scan: Vec<Point3> = (0..3600)
//!     .map(|k| {
//!         let a = (k % 360) as f64 * std::f64::consts::PI / 180.0;
//!         let r = 3.0 + (k / 360) as f64;
//!         Point3::new(r * a.cos(), r * a.sin(), -1.73)
//!     })
//!     .collect();
//! let result = run_scan(&scan, &SegmentationConfig::hdl64e()).unwrap();
//! assert_eq!(result.num_ground(), scan.len());
//! ```

// `!(x < t)` is used on purpose so that NaN fails every threshold test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elevation;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod labeling;
pub mod pipeline;

pub use error::{Error, Result};
pub use geometry::{Point3, SensorModel};
pub use grid::{CellLabel, GridConfig, RadialDivision};
pub use pipeline::{run_scan, SegmentationConfig, SegmentationResult, Segmenter};

// SPDX-License-Identifier: Apache-2.0

//! Metrics, runtime measurement, parameter search and synthetic scenes.

mod bench;
mod metrics;
mod search;
pub mod synth;

pub use bench::{benchmark_runtime, RuntimeReport, TimingStat};
pub use metrics::{
    aggregate_metrics, compute_metrics, confusion_counts, format_csv, format_table, ConfusionCounts, MetricReport,
};
pub use search::{format_search_csv, grid_search, LabeledScan, ParamGrid, ParamSet, SearchRow};
pub use synth::{synth_scene, MirrorPatch, Occluder, RayPattern, SceneSpec, SyntheticScene, Terrain};

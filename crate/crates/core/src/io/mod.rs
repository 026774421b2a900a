// SPDX-License-Identifier: Apache-2.0

//! File formats: scans, labels, mappings, configs and outputs.

mod cloud;
mod config;
mod mapping;
mod output;

pub use cloud::{read_labels, read_point_cloud_bin, write_labels, write_point_cloud_bin, ScanRecord};
pub use config::{config_to_string, load_config, parse_config, save_config};
pub use mapping::{LabelMapping, TruthClass};
pub use output::{export_elevation_map, write_elevation_map, write_segmentation, OutputFormat};

// SPDX-License-Identifier: Apache-2.0

//! TOML configuration files.
//!
//! ```toml
//! [sensor]
//! preset = "HDL64E"        # optional; explicit keys below override it
//! sigma_r = 0.02
//! sigma_phi_deg = 0.033
//! sigma_theta_deg = 0.009
//! h_s = 1.73
//! t_h = -1.43
//! k_sigma = 1.0
//!
//! [grid]
//! delta_alpha_deg = 3.0
//! m = 80
//! r0 = 0.5
//! r_max = 80.0
//! radial_division = "equidistant"   # or "linear" (needs d0), "manual" (needs boundaries)
//!
//! [thresholds]
//! t_delta_slope_deg = 7.0
//! t_delta_r = 10.0
//! t_z = 0.15
//! slope_mode = "adaptive"           # or "traditional"
//! cgp_wrap_azimuth = false
//!
//! [ego]
//! x_min = -2.5
//! x_max = 2.5
//! y_min = -1.2
//! y_max = 1.2
//! z_min = -2.0
//! z_max = 0.5
//! ```
//!
//! Angles are read in degrees and stored in radians. Unknown keys are
//! rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::elevation::ClassifyThresholds;
use crate::error::{Error, Result};
use crate::geometry::{Point3, SensorModel};
use crate::grid::{GridConfig, RadialDivision};
use crate::labeling::{LabelThresholds, SlopeMode};
use crate::pipeline::{EgoBox, SegmentationConfig};

const DEFAULT_DELTA_ALPHA_DEG: f64 = 3.0;
const DEFAULT_M: usize = 80;
const DEFAULT_R0: f64 = 0.5;
const DEFAULT_R_MAX: f64 = 80.0;
const DEFAULT_SLOPE_DEG: f64 = 7.0;
const DEFAULT_T_DELTA_R: f64 = 10.0;
const DEFAULT_T_Z: f64 = 0.15;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    sensor: Option<SensorSection>,
    grid: Option<GridSection>,
    thresholds: Option<ThresholdSection>,
    ego: Option<EgoSection>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    sigma_r: Option<f64>,
    sigma_phi_deg: Option<f64>,
    sigma_theta_deg: Option<f64>,
    h_s: Option<f64>,
    t_h: Option<f64>,
    k_sigma: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    delta_alpha_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    r0: Option<f64>,
    r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radial_division: Option<DivisionKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundaries: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DivisionKind {
    Equidistant,
    Linear,
    Manual,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdSection {
    t_delta_slope_deg: Option<f64>,
    t_delta_r: Option<f64>,
    t_z: Option<f64>,
    slope_mode: Option<SlopeMode>,
    cgp_wrap_azimuth: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EgoSection {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    z_min: f64,
    z_max: f64,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SegmentationConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        Error::Config(message) => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

/// Parse configuration text. Errors carry an empty path.
pub fn parse_config(text: &str) -> Result<SegmentationConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Parse {
        path: Default::default(),
        message: e.message().to_string(),
    })?;
    let sensor = build_sensor(doc.sensor.ok_or_else(|| Error::config("missing [sensor] section"))?)?;
    let grid = build_grid(doc.grid.unwrap_or_default())?;
    let th = doc.thresholds.unwrap_or_default();
    let slope_deg = th.t_delta_slope_deg.unwrap_or(DEFAULT_SLOPE_DEG);
    if !(slope_deg > 0.0 && slope_deg < 90.0) {
        return Err(Error::config(format!("t_delta_slope_deg must be in (0, 90), got {slope_deg}")));
    }
    let labeling = LabelThresholds {
        t_delta_slope: slope_deg.to_radians().tan(),
        t_delta_r: th.t_delta_r.unwrap_or(DEFAULT_T_DELTA_R),
        slope_mode: th.slope_mode.unwrap_or_default(),
        cgp_wrap_azimuth: th.cgp_wrap_azimuth.unwrap_or(false),
    };
    let classify = ClassifyThresholds {
        t_z: th.t_z.unwrap_or(DEFAULT_T_Z),
    };
    let ego_box = doc.ego.map(|e| EgoBox {
        min: Point3::new(e.x_min, e.y_min, e.z_min),
        max: Point3::new(e.x_max, e.y_max, e.z_max),
    });
    let config = SegmentationConfig {
        sensor,
        grid,
        labeling,
        classify,
        ego_box,
    };
    config.validate()?;
    Ok(config)
}

fn build_sensor(s: SensorSection) -> Result<SensorModel> {
    let base = match &s.preset {
        Some(name) => Some(SensorModel::preset(name).ok_or_else(|| {
            let known: Vec<_> = SensorModel::preset_names().collect();
            Error::config(format!("unknown sensor preset {name:?}; known: {}", known.join(", ")))
        })?),
        None => None,
    };
    let need = |v: Option<f64>, from_base: Option<f64>, key: &str| {
        v.or(from_base).ok_or_else(|| Error::config(format!("missing sensor key {key}")))
    };
    let sensor = SensorModel {
        sigma_r: need(s.sigma_r, base.map(|b| b.sigma_r), "sigma_r")?,
        sigma_phi: match s.sigma_phi_deg {
            Some(d) => d.to_radians(),
            None => need(None, base.map(|b| b.sigma_phi), "sigma_phi_deg")?,
        },
        sigma_theta: match s.sigma_theta_deg {
            Some(d) => d.to_radians(),
            None => need(None, base.map(|b| b.sigma_theta), "sigma_theta_deg")?,
        },
        mount_height: need(s.h_s, base.map(|b| b.mount_height), "h_s")?,
        seed_height_threshold: need(s.t_h, base.map(|b| b.seed_height_threshold), "t_h")?,
        k_sigma: s.k_sigma.unwrap_or(1.0),
    };
    sensor.validate()?;
    Ok(sensor)
}

fn build_grid(g: GridSection) -> Result<GridConfig> {
    let kind = g.radial_division.unwrap_or(DivisionKind::Equidistant);
    if g.d0.is_some() && kind != DivisionKind::Linear {
        return Err(Error::config("d0 is only valid with radial_division = \"linear\""));
    }
    if g.boundaries.is_some() && kind != DivisionKind::Manual {
        return Err(Error::config("boundaries are only valid with radial_division = \"manual\""));
    }
    let division = match kind {
        DivisionKind::Equidistant => RadialDivision::Equidistant,
        DivisionKind::Linear => RadialDivision::Linear {
            d0: g.d0.ok_or_else(|| Error::config("linear division needs d0"))?,
        },
        DivisionKind::Manual => {
            let boundaries = g.boundaries.ok_or_else(|| Error::config("manual division needs boundaries"))?;
            if let Some(m) = g.m {
                if m + 1 != boundaries.len() {
                    return Err(Error::config(format!(
                        "m = {m} disagrees with {} manual boundaries",
                        boundaries.len()
                    )));
                }
            }
            RadialDivision::Manual { boundaries }
        }
    };
    let (r0, r_max) = match &division {
        RadialDivision::Manual { boundaries } if !boundaries.is_empty() => (
            g.r0.unwrap_or(boundaries[0]),
            g.r_max.unwrap_or(*boundaries.last().unwrap()),
        ),
        _ => (g.r0.unwrap_or(DEFAULT_R0), g.r_max.unwrap_or(DEFAULT_R_MAX)),
    };
    GridConfig::new(
        g.delta_alpha_deg.unwrap_or(DEFAULT_DELTA_ALPHA_DEG).to_radians(),
        g.m.unwrap_or(DEFAULT_M),
        r0,
        r_max,
        division,
    )
}

/// Render a configuration so that [`parse_config`] reproduces it exactly.
pub fn config_to_string(config: &SegmentationConfig) -> String {
    let s = &config.sensor;
    let g = &config.grid;
    let (kind, d0, boundaries, m) = match g.division() {
        RadialDivision::Equidistant => (DivisionKind::Equidistant, None, None, Some(g.num_cells())),
        RadialDivision::Linear { d0 } => (DivisionKind::Linear, Some(*d0), None, Some(g.num_cells())),
        RadialDivision::Manual { boundaries } => (DivisionKind::Manual, None, Some(boundaries.clone()), None),
    };
    let doc = ConfigDoc {
        sensor: Some(SensorSection {
            preset: None,
            sigma_r: Some(s.sigma_r),
            sigma_phi_deg: Some(degrees_of(s.sigma_phi)),
            sigma_theta_deg: Some(degrees_of(s.sigma_theta)),
            h_s: Some(s.mount_height),
            t_h: Some(s.seed_height_threshold),
            k_sigma: Some(s.k_sigma),
        }),
        grid: Some(GridSection {
            delta_alpha_deg: Some(360.0 / g.num_segments() as f64),
            m,
            r0: Some(g.r0()),
            r_max: Some(g.r_max()),
            radial_division: Some(kind),
            d0,
            boundaries,
        }),
        thresholds: Some(ThresholdSection {
            t_delta_slope_deg: Some(slope_degrees_of(config.labeling.t_delta_slope)),
            t_delta_r: Some(config.labeling.t_delta_r),
            t_z: Some(config.classify.t_z),
            slope_mode: Some(config.labeling.slope_mode),
            cgp_wrap_azimuth: Some(config.labeling.cgp_wrap_azimuth),
        }),
        ego: config.ego_box.map(|b| EgoSection {
            x_min: b.min.x,
            x_max: b.max.x,
            y_min: b.min.y,
            y_max: b.max.y,
            z_min: b.min.z,
            z_max: b.max.z,
        }),
    };
    toml::to_string(&doc).expect("config document serializes")
}

pub fn save_config(config: &SegmentationConfig, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, config_to_string(config)).map_err(|e| Error::io(path, e))
}

/// Degree value whose `to_radians` is exactly `rad`, when one exists near
/// the naive conversion.
fn degrees_of(rad: f64) -> f64 {
    exact_preimage(rad.to_degrees(), rad, |d| d.to_radians())
}

fn slope_degrees_of(tan: f64) -> f64 {
    exact_preimage(tan.atan().to_degrees(), tan, |d| d.to_radians().tan())
}

/// Search a few ulps around `guess` for an input that maps to `target`.
fn exact_preimage(guess: f64, target: f64, forward: impl Fn(f64) -> f64) -> f64 {
    let mut lo = guess;
    let mut hi = guess;
    for _ in 0..64 {
        if forward(lo) == target {
            return lo;
        }
        if forward(hi) == target {
            return hi;
        }
        lo = lo.next_down();
        hi = hi.next_up();
    }
    guess
}

// SPDX-License-Identifier: Apache-2.0

//! Coordinate conversions, measurement-uncertainty propagation and the two
//! slope functions used by ground labeling.
//!
//! The spherical convention places `sin(theta)` on the x axis:
//!
//! ```text
//! x = R cos(phi) sin(theta)
//! y = R cos(phi) cos(theta)
//! z = R sin(phi)
//! ```
//!
//! so the azimuth is recovered with `atan2(x, y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in the sensor frame, meters, Z up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Distance from the sensor axis in the XY plane.
    pub fn horizontal_range(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    /// 2D (XY) distance to `other`.
    pub fn xy_distance(&self, other: &Point3) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Raw spherical measurement: range, elevation and azimuth (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalCoord {
    pub r: f64,
    pub phi: f64,
    pub theta: f64,
}

pub fn spherical_from_cartesian(p: &Point3) -> Result<SphericalCoord> {
    let r = p.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::DegeneratePoint);
    }
    let phi = (p.z / r).clamp(-1.0, 1.0).asin();
    let theta = p.x.atan2(p.y);
    Ok(SphericalCoord { r, phi, theta })
}

pub fn cartesian_from_spherical(s: &SphericalCoord) -> Point3 {
    let (sin_phi, cos_phi) = s.phi.sin_cos();
    let (sin_theta, cos_theta) = s.theta.sin_cos();
    Point3 {
        x: s.r * cos_phi * sin_theta,
        y: s.r * cos_phi * cos_theta,
        z: s.r * sin_phi,
    }
}

/// Per-sensor noise model and mounting geometry. Angles are radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel {
    /// Range standard deviation, meters.
    pub sigma_r: f64,
    /// Elevation-angle standard deviation, radians.
    pub sigma_phi: f64,
    /// Azimuth standard deviation, radians.
    pub sigma_theta: f64,
    /// Sensor height above the ground, meters.
    pub mount_height: f64,
    /// Seed cells must have a representative Z below this value.
    pub seed_height_threshold: f64,
    /// Sigma multiplier applied to every propagated standard deviation.
    pub k_sigma: f64,
}

/// Named sensor rows (range sigma in meters, angular sigmas in degrees,
/// mount height, seed threshold).
const SENSOR_TABLE: &[(&str, f64, f64, f64, f64, f64)] = &[
    ("HDL64E", 0.02, 0.033, 0.009, 1.73, -1.43),
    ("HDL32E", 0.02, 0.033, 0.008, 1.84, -1.54),
    ("LS128S2", 0.03, 0.020, 0.009, 1.35, -1.05),
    ("CB64S1", 0.03, 0.063, 0.012, 1.4, -1.1),
    ("FalconK1", 0.02, 0.010, 0.010, 2.5, -2.2),
    ("FalconK3", 0.02, 0.010, 0.007, 2.6, -2.3),
    ("RS-M1", 0.025, 0.010, 0.010, 0.8, -0.5),
    ("Ouster2", 0.02, 0.010, 0.010, 1.8, -1.5),
    ("VLP32C", 0.03, 0.033, 0.010, 0.7, -0.4),
    ("OS1-128", 0.03, 0.010, 0.010, 0.5, -0.2),
];

impl SensorModel {
    /// Build a model from datasheet-style values with angles in degrees.
    pub fn from_degrees(
        sigma_r: f64,
        sigma_phi_deg: f64,
        sigma_theta_deg: f64,
        mount_height: f64,
        seed_height_threshold: f64,
    ) -> Self {
        Self {
            sigma_r,
            sigma_phi: sigma_phi_deg.to_radians(),
            sigma_theta: sigma_theta_deg.to_radians(),
            mount_height,
            seed_height_threshold,
            k_sigma: 1.0,
        }
    }

    /// Look up a known sensor by name (case-insensitive).
    pub fn preset(name: &str) -> Option<Self> {
        SENSOR_TABLE
            .iter()
            .find(|row| row.0.eq_ignore_ascii_case(name))
            .map(|&(_, sr, sp, st, hs, th)| Self::from_degrees(sr, sp, st, hs, th))
    }

    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        SENSOR_TABLE.iter().map(|row| row.0)
    }

    pub fn hdl64e() -> Self {
        Self::preset("HDL64E").expect("built-in preset")
    }

    pub fn with_k_sigma(mut self, k_sigma: f64) -> Self {
        self.k_sigma = k_sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sigma_r", self.sigma_r),
            ("sigma_phi", self.sigma_phi),
            ("sigma_theta", self.sigma_theta),
            ("k_sigma", self.k_sigma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !self.mount_height.is_finite() || !self.seed_height_threshold.is_finite() {
            return Err(Error::config("mount height and seed threshold must be finite"));
        }
        Ok(())
    }

    /// The leveled-ground reference point below the sensor.
    pub fn virtual_origin(&self) -> Measurement {
        Measurement::exact(Point3::new(0.0, 0.0, -self.mount_height))
    }
}

/// Cartesian standard deviations of one measured point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointSigma {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub sigma_z: f64,
}

impl PointSigma {
    pub const ZERO: PointSigma = PointSigma {
        sigma_x: 0.0,
        sigma_y: 0.0,
        sigma_z: 0.0,
    };
}

/// Standard deviations of the height difference and the XY baseline of a
/// point pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairSigma {
    pub sigma_dz: f64,
    pub sigma_dr: f64,
}

/// Propagate independent (R, phi, theta) noise to Cartesian sigmas.
///
/// Written with the direction cosines instead of trigonometric calls; the
/// terms are identical to the spherical form since
/// `cos^2(phi) sin^2(theta) = x^2 / R^2` and so on.
pub fn point_sigma(p: &Point3, sensor: &SensorModel) -> Result<PointSigma> {
    let rho2 = p.x * p.x + p.y * p.y;
    let r2 = rho2 + p.z * p.z;
    if r2 == 0.0 || !r2.is_finite() {
        return Err(Error::DegeneratePoint);
    }
    // on the z axis theta = atan2(0, 0) = 0, i.e. sin = 0, cos = 1
    let (sin2_theta, cos2_theta) = if rho2 > 0.0 {
        (p.x * p.x / rho2, p.y * p.y / rho2)
    } else {
        (0.0, 1.0)
    };
    let cos2_phi = rho2 / r2;
    let sin2_phi = p.z * p.z / r2;
    let var_r = sensor.sigma_r * sensor.sigma_r;
    let var_phi = sensor.sigma_phi * sensor.sigma_phi;
    let var_theta = sensor.sigma_theta * sensor.sigma_theta;

    let var_x = cos2_phi * sin2_theta * var_r
        + r2 * sin2_phi * sin2_theta * var_phi
        + r2 * cos2_phi * cos2_theta * var_theta;
    let var_y = cos2_phi * cos2_theta * var_r
        + r2 * sin2_phi * cos2_theta * var_phi
        + r2 * cos2_phi * sin2_theta * var_theta;
    let var_z = sin2_phi * var_r + r2 * cos2_phi * var_phi;

    let k = sensor.k_sigma;
    Ok(PointSigma {
        sigma_x: k * var_x.sqrt(),
        sigma_y: k * var_y.sqrt(),
        sigma_z: k * var_z.sqrt(),
    })
}

/// A point together with its propagated uncertainty. Synthetic points (the
/// virtual origin) are exact and carry zero sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub point: Point3,
    pub sigma: PointSigma,
}

impl Measurement {
    pub fn observe(point: Point3, sensor: &SensorModel) -> Result<Self> {
        Ok(Self {
            point,
            sigma: point_sigma(&point, sensor)?,
        })
    }

    pub fn exact(point: Point3) -> Self {
        Self {
            point,
            sigma: PointSigma::ZERO,
        }
    }
}

/// Sigma of `z_l - z_k` and of the XY baseline between two measurements.
pub fn pair_sigma_of(k: &Measurement, l: &Measurement) -> Result<PairSigma> {
    let dx = l.point.x - k.point.x;
    let dy = l.point.y - k.point.y;
    let dr = (dx * dx + dy * dy).sqrt();
    if dr == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(pair_sigma_with_baseline(k, l, dx, dy, dr))
}

#[inline]
fn pair_sigma_with_baseline(k: &Measurement, l: &Measurement, dx: f64, dy: f64, dr: f64) -> PairSigma {
    let (sk, sl) = (&k.sigma, &l.sigma);
    let sigma_dz = (sl.sigma_z * sl.sigma_z + sk.sigma_z * sk.sigma_z).sqrt();
    let cx = dx / dr;
    let cy = dy / dr;
    let sigma_dr = (cx * cx * (sl.sigma_x * sl.sigma_x + sk.sigma_x * sk.sigma_x)
        + cy * cy * (sl.sigma_y * sl.sigma_y + sk.sigma_y * sk.sigma_y))
        .sqrt();
    PairSigma { sigma_dz, sigma_dr }
}

/// Pair sigmas for two measured points.
pub fn pair_sigma(pk: &Point3, pl: &Point3, sensor: &SensorModel) -> Result<PairSigma> {
    let k = Measurement::observe(*pk, sensor)?;
    let l = Measurement::observe(*pl, sensor)?;
    pair_sigma_of(&k, &l)
}

/// Height change over XY baseline from `pk` to `pl`.
pub fn traditional_slope(pk: &Point3, pl: &Point3) -> Result<f64> {
    let dr = pk.xy_distance(pl);
    if dr == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((pl.z - pk.z) / dr)
}

/// Slope with an uncertainty dead zone on the height difference and the
/// baseline inflated by its own sigma. Never larger in magnitude than the
/// traditional slope and never of opposite sign.
pub fn adaptive_slope_of(k: &Measurement, l: &Measurement) -> Result<f64> {
    let dx = l.point.x - k.point.x;
    let dy = l.point.y - k.point.y;
    let dr = (dx * dx + dy * dy).sqrt();
    if dr == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    let dz = l.point.z - k.point.z;
    let s = pair_sigma_with_baseline(k, l, dx, dy, dr);
    Ok(dead_zone_slope(dz, dr, s))
}

#[inline]
fn dead_zone_slope(dz: f64, dr: f64, s: PairSigma) -> f64 {
    if dz.abs() <= s.sigma_dz {
        0.0
    } else if dz > s.sigma_dz {
        (dz - s.sigma_dz) / (dr + s.sigma_dr)
    } else {
        (dz + s.sigma_dz) / (dr + s.sigma_dr)
    }
}

/// Adaptive slope between two measured points.
pub fn adaptive_slope(pk: &Point3, pl: &Point3, sensor: &SensorModel) -> Result<f64> {
    let k = Measurement::observe(*pk, sensor)?;
    let l = Measurement::observe(*pl, sensor)?;
    adaptive_slope_of(&k, &l)
}

// SPDX-License-Identifier: Apache-2.0

//! Ray-cast synthetic scans with exact per-point truth.
//!
//! A spinning sensor at the origin fires one ray per (beam, azimuth step)
//! against an analytic terrain and a set of axis-aligned boxes. Mirror
//! patches add, for every terrain return inside them, a second return
//! straight below the surface, the way a specular puddle or glass reflection
//! shows up in real scans. Truth classes follow the SemanticKITTI ids so the
//! default mapping applies unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::io::ScanRecord;

/// Terrain returns ("road").
pub const CLASS_GROUND: u32 = 40;
/// Box returns ("car").
pub const CLASS_OBJECT: u32 = 10;
/// Mirrored returns below the surface ("other-object").
pub const CLASS_REFLECTION: u32 = 99;

/// Terrain height as a function of XY, relative to the plane `z = -H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terrain {
    Flat,
    /// Plane rising by `slope_deg` towards the azimuth `heading_deg`
    /// (measured from +X towards +Y).
    Inclined { slope_deg: f64, heading_deg: f64 },
    /// Paraboloid `r^2 / (2 radius)`: a bowl for positive radius, a dome
    /// for negative.
    Curved { radius: f64 },
}

impl Terrain {
    fn gradient(&self) -> (f64, f64) {
        match *self {
            Terrain::Inclined { slope_deg, heading_deg } => {
                let g = slope_deg.to_radians().tan();
                let h = heading_deg.to_radians();
                (g * h.cos(), g * h.sin())
            }
            _ => (0.0, 0.0),
        }
    }

    fn relief(&self, x: f64, y: f64) -> f64 {
        match *self {
            Terrain::Flat => 0.0,
            Terrain::Inclined { .. } => {
                let (gx, gy) = self.gradient();
                gx * x + gy * y
            }
            Terrain::Curved { radius } => (x * x + y * y) / (2.0 * radius),
        }
    }

    fn name(&self) -> String {
        match *self {
            Terrain::Flat => "flat".into(),
            Terrain::Inclined { slope_deg, heading_deg } => {
                format!("inclined {slope_deg} deg towards {heading_deg} deg")
            }
            Terrain::Curved { radius } => format!("curved, radius {radius} m"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occluder {
    pub min: Point3,
    pub max: Point3,
}

impl Occluder {
    /// Box standing on `z = base_z`, centered at `(cx, cy)`.
    pub fn standing(cx: f64, cy: f64, base_z: f64, size_x: f64, size_y: f64, height: f64) -> Self {
        Self {
            min: Point3::new(cx - size_x / 2.0, cy - size_y / 2.0, base_z),
            max: Point3::new(cx + size_x / 2.0, cy + size_y / 2.0, base_z + height),
        }
    }

    /// Entry distance of the ray `t * d` (slab test).
    fn hit(&self, d: [f64; 3]) -> Option<f64> {
        let lo = [self.min.x, self.min.y, self.min.z];
        let hi = [self.max.x, self.max.y, self.max.z];
        let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
        for a in 0..3 {
            if d[a].abs() < 1e-15 {
                if 0.0 < lo[a] || 0.0 > hi[a] {
                    return None;
                }
                continue;
            }
            let (mut ta, mut tb) = (lo[a] / d[a], hi[a] / d[a]);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        (t0 > 0.0).then_some(t0)
    }
}

/// Region of the terrain that also produces a mirrored return `depth`
/// meters below the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorPatch {
    pub r_min: f64,
    pub r_max: f64,
    /// Azimuth window, `atan2(y, x)` in degrees within [-180, 180].
    pub azimuth_min_deg: f64,
    pub azimuth_max_deg: f64,
    pub depth: f64,
}

impl MirrorPatch {
    fn contains(&self, x: f64, y: f64) -> bool {
        let r = x.hypot(y);
        let az = y.atan2(x).to_degrees();
        r >= self.r_min && r <= self.r_max && az >= self.azimuth_min_deg && az <= self.azimuth_max_deg
    }
}

/// Beam elevations and azimuth sampling of a spinning sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPattern {
    pub elevations_deg: Vec<f64>,
    pub azimuth_steps: usize,
}

impl RayPattern {
    /// 64 beams in two blocks, +2 to -8.33 deg and -8.83 to -24.8 deg,
    /// 2000 columns per revolution.
    pub fn hdl64e_like() -> Self {
        let upper = (0..32).map(|k| 2.0 - k as f64 * (2.0 + 8.33) / 31.0);
        let lower = (0..32).map(|k| -8.83 - k as f64 * (24.8 - 8.83) / 31.0);
        Self {
            elevations_deg: upper.chain(lower).collect(),
            azimuth_steps: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub terrain: Terrain,
    /// Sensor height above the terrain at the origin.
    pub sensor_height: f64,
    pub occluders: Vec<Occluder>,
    pub mirrors: Vec<MirrorPatch>,
    pub rays: RayPattern,
    /// Isotropic Gaussian noise added to every coordinate, meters.
    pub noise_sigma: f64,
    /// Returns beyond this horizontal range are dropped.
    pub max_range: f64,
    pub seed: u64,
}

impl SceneSpec {
    /// Flat ground 1.73 m below an HDL-64E-like sensor, 2 cm noise.
    pub fn flat(seed: u64) -> Self {
        Self {
            terrain: Terrain::Flat,
            sensor_height: 1.73,
            occluders: Vec::new(),
            mirrors: Vec::new(),
            rays: RayPattern::hdl64e_like(),
            noise_sigma: 0.02,
            max_range: 80.0,
            seed,
        }
    }

    pub fn with_terrain(mut self, terrain: Terrain) -> Self {
        self.terrain = terrain;
        self
    }

    pub fn with_occluder(mut self, b: Occluder) -> Self {
        self.occluders.push(b);
        self
    }

    pub fn with_mirror(mut self, m: MirrorPatch) -> Self {
        self.mirrors.push(m);
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    /// Terrain height at `(x, y)`.
    pub fn surface_height(&self, x: f64, y: f64) -> f64 {
        -self.sensor_height + self.terrain.relief(x, y)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Scene(m.to_string()));
        if !(self.sensor_height.is_finite() && self.sensor_height > 0.0) {
            return bad("sensor height must be > 0");
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise sigma must be >= 0");
        }
        if !(self.max_range.is_finite() && self.max_range > 0.0) {
            return bad("max range must be > 0");
        }
        if self.rays.elevations_deg.is_empty() || self.rays.azimuth_steps == 0 {
            return bad("ray pattern is empty");
        }
        if self.rays.elevations_deg.iter().any(|e| !(e.abs() < 90.0)) {
            return bad("beam elevations must lie in (-90, 90) deg");
        }
        match self.terrain {
            Terrain::Inclined { slope_deg, heading_deg } => {
                if !(slope_deg.abs() < 45.0 && heading_deg.is_finite()) {
                    return bad("incline must be below 45 deg");
                }
            }
            Terrain::Curved { radius } => {
                if !(radius.is_finite() && radius != 0.0) {
                    return bad("curvature radius must be finite and non-zero");
                }
            }
            Terrain::Flat => {}
        }
        for b in &self.occluders {
            if !(b.min.x < b.max.x && b.min.y < b.max.y && b.min.z < b.max.z) {
                return bad("occluder needs min < max on every axis");
            }
        }
        for m in &self.mirrors {
            if !(m.r_min < m.r_max && m.azimuth_min_deg < m.azimuth_max_deg && m.depth > 0.0) {
                return bad("mirror patch needs r_min < r_max, az_min < az_max and depth > 0");
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "{} terrain, {} occluder(s), {} mirror patch(es), noise {} m, seed {}",
            self.terrain.name(),
            self.occluders.len(),
            self.mirrors.len(),
            self.noise_sigma,
            self.seed
        )
    }

    /// First terrain crossing of the ray `t * d`.
    fn terrain_hit(&self, d: [f64; 3]) -> Option<f64> {
        let h = self.sensor_height;
        match self.terrain {
            Terrain::Flat | Terrain::Inclined { .. } => {
                let (gx, gy) = self.terrain.gradient();
                let den = d[2] - gx * d[0] - gy * d[1];
                (den < 0.0).then(|| -h / den)
            }
            Terrain::Curved { radius } => {
                // t^2 c2 / (2 radius) - t dz - h = 0
                let a = (d[0] * d[0] + d[1] * d[1]) / (2.0 * radius);
                let (b, c) = (-d[2], -h);
                smallest_positive_root(a, b, c)
            }
        }
    }
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    if a.abs() < 1e-15 {
        let t = -c / b;
        return (b != 0.0 && t > 0.0).then_some(t);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut best = None::<f64>;
    for t in [q / a, if q != 0.0 { c / q } else { f64::NAN }] {
        if t > 0.0 && best.is_none_or(|b| t < b) {
            best = Some(t);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    /// Points with truth classes in `classes`.
    pub record: ScanRecord,
    pub description: String,
}

impl SyntheticScene {
    pub fn points(&self) -> &[Point3] {
        &self.record.points
    }

    pub fn classes(&self) -> &[u32] {
        self.record.classes.as_deref().unwrap_or(&[])
    }

    pub fn truth_ground(&self) -> Vec<bool> {
        self.classes().iter().map(|&c| c == CLASS_GROUND).collect()
    }

    pub fn indices_of(&self, class: u32) -> Vec<usize> {
        self.classes()
            .iter()
            .enumerate()
            .filter_map(|(k, &c)| (c == class).then_some(k))
            .collect()
    }
}

/// Generate the scene. Identical specs give identical scans.
pub fn synth_scene(spec: &SceneSpec) -> Result<SyntheticScene> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Scene(e.to_string()))?;
    let mut jitter = |p: Point3| {
        if spec.noise_sigma == 0.0 {
            return p;
        }
        Point3::new(
            p.x + noise.sample(&mut rng),
            p.y + noise.sample(&mut rng),
            p.z + noise.sample(&mut rng),
        )
    };

    let n_rays = spec.rays.elevations_deg.len() * spec.rays.azimuth_steps;
    let mut points = Vec::with_capacity(n_rays);
    let mut classes = Vec::with_capacity(n_rays);
    let step = std::f64::consts::TAU / spec.rays.azimuth_steps as f64;
    for col in 0..spec.rays.azimuth_steps {
        let theta = (col as f64 + 0.5) * step;
        let (st, ct) = theta.sin_cos();
        for &elev in &spec.rays.elevations_deg {
            let (sp, cp) = elev.to_radians().sin_cos();
            let d = [cp * ct, cp * st, sp];

            let ground_t = spec.terrain_hit(d);
            let box_t = spec.occluders.iter().filter_map(|b| b.hit(d)).min_by(f64::total_cmp);
            let (t, class) = match (ground_t, box_t) {
                (Some(g), Some(b)) if b <= g => (b, CLASS_OBJECT),
                (Some(g), _) => (g, CLASS_GROUND),
                (None, Some(b)) => (b, CLASS_OBJECT),
                (None, None) => continue,
            };
            let hit = Point3::new(t * d[0], t * d[1], t * d[2]);
            if hit.horizontal_range() > spec.max_range {
                continue;
            }
            points.push(jitter(hit));
            classes.push(class);
            if class == CLASS_GROUND {
                if let Some(m) = spec.mirrors.iter().find(|m| m.contains(hit.x, hit.y)) {
                    let below = Point3::new(hit.x, hit.y, spec.surface_height(hit.x, hit.y) - m.depth);
                    points.push(jitter(below));
                    classes.push(CLASS_REFLECTION);
                }
            }
        }
    }
    Ok(SyntheticScene {
        record: ScanRecord {
            points,
            intensity: None,
            classes: Some(classes),
        },
        description: spec.describe(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_plane_is_all_ground() {
        let s = synth_scene(&SceneSpec::flat(1).with_noise(0.0)).unwrap();
        assert!(!s.points().is_empty());
        assert!(s.classes().iter().all(|&c| c == CLASS_GROUND));
        assert!(s.points().iter().all(|p| (p.z + 1.73).abs() < 1e-9));
    }

    #[test]
    fn box_points_are_non_ground() {
        let b = Occluder::standing(10.0, 0.0, -1.73, 2.0, 2.0, 2.0);
        let s = synth_scene(&SceneSpec::flat(2).with_noise(0.0).with_occluder(b)).unwrap();
        let idx = s.indices_of(CLASS_OBJECT);
        assert!(!idx.is_empty());
        for k in idx {
            let p = s.points()[k];
            assert!(p.x >= 9.0 - 1e-9 && p.z >= -1.73 - 1e-9);
        }
    }

    #[test]
    fn reflections_lie_below_inclined_surface() {
        let spec = SceneSpec::flat(3)
            .with_noise(0.0)
            .with_terrain(Terrain::Inclined {
                slope_deg: 7.0,
                heading_deg: 30.0,
            })
            .with_mirror(MirrorPatch {
                r_min: 10.0,
                r_max: 20.0,
                azimuth_min_deg: -20.0,
                azimuth_max_deg: 20.0,
                depth: 0.8,
            });
        let s = synth_scene(&spec).unwrap();
        let refl = s.indices_of(CLASS_REFLECTION);
        assert!(!refl.is_empty());
        for k in refl {
            let p = s.points()[k];
            assert!((spec.surface_height(p.x, p.y) - p.z - 0.8).abs() < 1e-9);
        }
        for k in s.indices_of(CLASS_GROUND) {
            let p = s.points()[k];
            assert!((spec.surface_height(p.x, p.y) - p.z).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_and_rejects_bad_specs() {
        let a = synth_scene(&SceneSpec::flat(7)).unwrap();
        let b = synth_scene(&SceneSpec::flat(7)).unwrap();
        assert_eq!(a, b);
        assert!(synth_scene(&SceneSpec::flat(7).with_noise(-1.0)).is_err());
        assert!(synth_scene(&SceneSpec::flat(7).with_terrain(Terrain::Curved { radius: 0.0 })).is_err());
    }

    #[test]
    fn curved_hits_lie_on_surface() {
        let spec = SceneSpec::flat(4).with_noise(0.0).with_terrain(Terrain::Curved { radius: -400.0 });
        let s = synth_scene(&spec).unwrap();
        for p in s.points() {
            assert!((spec.surface_height(p.x, p.y) - p.z).abs() < 1e-6);
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Exhaustive parameter search ranked by mean per-scan F1.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::metrics::{confusion_counts, ConfusionCounts, MetricReport};
use crate::geometry::Point3;
use crate::grid::GridConfig;
use crate::io::LabelMapping;
use crate::pipeline::{SegmentationConfig, Segmenter};

/// A scan with per-point truth class ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledScan {
    pub points: Vec<Point3>,
    pub classes: Vec<u32>,
}

/// Candidate values per axis. Every axis needs at least one value.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    pub delta_alpha_deg: Vec<f64>,
    pub m: Vec<usize>,
    pub t_delta_slope_deg: Vec<f64>,
    pub t_delta_r: Vec<f64>,
    pub t_z: Vec<f64>,
}

/// One point of a [`ParamGrid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    pub delta_alpha_deg: f64,
    pub m: usize,
    pub t_delta_slope_deg: f64,
    pub t_delta_r: f64,
    pub t_z: f64,
}

impl ParamGrid {
    /// Single combination equal to `config`.
    pub fn from_config(config: &SegmentationConfig) -> Self {
        Self {
            delta_alpha_deg: vec![360.0 / config.grid.num_segments() as f64],
            m: vec![config.grid.num_cells()],
            t_delta_slope_deg: vec![config.labeling.t_delta_slope.atan().to_degrees()],
            t_delta_r: vec![config.labeling.t_delta_r],
            t_z: vec![config.classify.t_z],
        }
    }

    /// The 5^5 ranges used to tune the defaults: 1 to 5 deg segments, radial
    /// resolution 0.5 to 2.5 m (so `M = round(r_max / res)`), slope-change
    /// limits of 3 to 11 deg, baselines of 3 to 20 m and height tolerances
    /// of 0.05 to 0.25 m.
    pub fn standard_ranges(r_max: f64) -> Self {
        Self {
            delta_alpha_deg: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            m: [0.5, 1.0, 1.5, 2.0, 2.5].iter().map(|res| (r_max / res).round() as usize).collect(),
            t_delta_slope_deg: vec![3.0, 5.0, 7.0, 9.0, 11.0],
            t_delta_r: vec![3.0, 5.0, 10.0, 15.0, 20.0],
            t_z: vec![0.05, 0.10, 0.15, 0.20, 0.25],
        }
    }

    pub fn len(&self) -> usize {
        self.delta_alpha_deg.len() * self.m.len() * self.t_delta_slope_deg.len() * self.t_delta_r.len() * self.t_z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All combinations, last axis varying fastest.
    pub fn combinations(&self) -> Vec<ParamSet> {
        let mut out = Vec::with_capacity(self.len());
        for &delta_alpha_deg in &self.delta_alpha_deg {
            for &m in &self.m {
                for &t_delta_slope_deg in &self.t_delta_slope_deg {
                    for &t_delta_r in &self.t_delta_r {
                        for &t_z in &self.t_z {
                            out.push(ParamSet {
                                delta_alpha_deg,
                                m,
                                t_delta_slope_deg,
                                t_delta_r,
                                t_z,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

impl ParamSet {
    /// `base` with this combination applied; range limits, division kind,
    /// sensor and ego box are kept.
    pub fn apply(&self, base: &SegmentationConfig) -> Result<SegmentationConfig> {
        let mut c = base.clone();
        c.grid = GridConfig::new(
            self.delta_alpha_deg.to_radians(),
            self.m,
            base.grid.r0(),
            base.grid.r_max(),
            base.grid.division().clone(),
        )?;
        c.labeling.t_delta_slope = self.t_delta_slope_deg.to_radians().tan();
        c.labeling.t_delta_r = self.t_delta_r;
        c.classify.t_z = self.t_z;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchRow {
    pub params: ParamSet,
    /// Mean of the per-scan F1 scores; the ranking key.
    pub mean_f1: f64,
    /// Metrics of the summed counts.
    pub micro: MetricReport,
    pub counts: ConfusionCounts,
}

/// Evaluate every combination on every scan, best first. Combinations run
/// in parallel; each pipeline run stays on one thread. `threads = None`
/// uses the global rayon pool.
pub fn grid_search(
    scans: &[LabeledScan],
    mapping: &LabelMapping,
    base: &SegmentationConfig,
    grid: &ParamGrid,
    threads: Option<usize>,
) -> Result<Vec<SearchRow>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if scans.is_empty() {
        return Err(Error::EmptyScan);
    }
    let combos = grid.combinations();
    let run = || -> Result<Vec<SearchRow>> {
        combos.par_iter().map(|p| evaluate_params(scans, mapping, base, p)).collect()
    };
    let mut rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    rows.sort_by(|a, b| b.mean_f1.total_cmp(&a.mean_f1));
    Ok(rows)
}

fn evaluate_params(
    scans: &[LabeledScan],
    mapping: &LabelMapping,
    base: &SegmentationConfig,
    params: &ParamSet,
) -> Result<SearchRow> {
    let segmenter = Segmenter::new(params.apply(base)?)?;
    let mut total = ConfusionCounts::default();
    let mut f1_sum = 0.0;
    for scan in scans {
        let result = segmenter.segment(&scan.points)?;
        let c = confusion_counts(&result.ground, &scan.classes, mapping)?;
        f1_sum += c.report().f1;
        total += c;
    }
    Ok(SearchRow {
        params: *params,
        mean_f1: f1_sum / scans.len() as f64,
        micro: total.report(),
        counts: total,
    })
}

/// CSV, one row per combination in ranking order.
pub fn format_search_csv(rows: &[SearchRow]) -> String {
    let mut out = String::from(
        "rank,delta_alpha_deg,m,t_delta_slope_deg,t_delta_r,t_z,mean_f1,micro_precision,micro_recall,micro_f1,micro_accuracy,micro_miou\n",
    );
    for (k, r) in rows.iter().enumerate() {
        let p = &r.params;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            k + 1,
            p.delta_alpha_deg,
            p.m,
            p.t_delta_slope_deg,
            p.t_delta_r,
            p.t_z,
            r.mean_f1,
            r.micro.precision,
            r.micro.recall,
            r.micro.f1,
            r.micro.accuracy,
            r.micro.miou
        );
    }
    out
}

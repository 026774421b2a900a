// SPDX-License-Identifier: Apache-2.0

//! Single-threaded runtime measurement.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::pipeline::{SegmentationConfig, Segmenter, StageTimings};

/// Mean and population standard deviation, milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimingStat {
    pub mean_ms: f64,
    pub stddev_ms: f64,
}

impl TimingStat {
    pub fn from_samples(samples_ms: &[f64]) -> Self {
        if samples_ms.is_empty() {
            return Self::default();
        }
        let n = samples_ms.len() as f64;
        let mean = samples_ms.iter().sum::<f64>() / n;
        let var = samples_ms.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean_ms: mean,
            stddev_ms: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuntimeReport {
    pub pgm: TimingStat,
    pub ugl: TimingStat,
    pub ege: TimingStat,
    pub pgs: TimingStat,
    pub total: TimingStat,
    /// Timed runs (scans x repeats), warm-up excluded.
    pub runs: usize,
    pub mean_points: f64,
}

impl RuntimeReport {
    /// Stage names ordered by descending mean time.
    pub fn stage_ranking(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![
            ("PGM", self.pgm.mean_ms),
            ("UGL", self.ugl.mean_ms),
            ("EGE", self.ege.mean_ms),
            ("PGS", self.pgs.mean_ms),
        ];
        v.sort_by(|a, b| b.1.total_cmp(&a.1));
        v
    }

    pub fn format_table(&self) -> String {
        let mut out = format!(
            "{} runs, {:.0} points per scan on average\n{:<6} {:>10} {:>10}\n",
            self.runs, self.mean_points, "stage", "mean_ms", "stddev_ms"
        );
        for (name, s) in [
            ("PGM", self.pgm),
            ("UGL", self.ugl),
            ("EGE", self.ege),
            ("PGS", self.pgs),
            ("total", self.total),
        ] {
            let _ = writeln!(out, "{name:<6} {:>10.3} {:>10.3}", s.mean_ms, s.stddev_ms);
        }
        out
    }
}

/// Time the pipeline on the calling thread. Every scan runs once untimed
/// before `repeats` timed passes over the whole set.
pub fn benchmark_runtime(scans: &[Vec<Point3>], config: &SegmentationConfig, repeats: usize) -> Result<RuntimeReport> {
    if scans.is_empty() {
        return Err(Error::EmptyScan);
    }
    let repeats = repeats.max(1);
    let segmenter = Segmenter::new(config.clone())?;
    for scan in scans {
        std::hint::black_box(segmenter.segment(scan)?);
    }
    let mut samples: Vec<StageTimings> = Vec::with_capacity(scans.len() * repeats);
    for _ in 0..repeats {
        for scan in scans {
            let r = segmenter.segment(scan)?;
            samples.push(r.timings);
        }
    }
    let stat = |f: fn(&StageTimings) -> f64| {
        let ms: Vec<f64> = samples.iter().map(|t| f(t) / 1e3).collect();
        TimingStat::from_samples(&ms)
    };
    Ok(RuntimeReport {
        pgm: stat(|t| t.pgm_us),
        ugl: stat(|t| t.ugl_us),
        ege: stat(|t| t.ege_us),
        pgs: stat(|t| t.pgs_us),
        total: stat(|t| t.total_us),
        runs: samples.len(),
        mean_points: scans.iter().map(Vec::len).sum::<usize>() as f64 / scans.len() as f64,
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Binary ground / non-ground confusion metrics.

use std::fmt::Write as _;
use std::ops::{Add, AddAssign};

use crate::error::{Error, Result};
use crate::io::{LabelMapping, TruthClass};

/// Ground is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub const fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    #[inline]
    pub fn record(&mut self, predicted_ground: bool, truth_ground: bool) {
        match (predicted_ground, truth_ground) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn report(&self) -> MetricReport {
        let (tp, fp, tn, fn_) = (self.tp as f64, self.fp as f64, self.tn as f64, self.fn_ as f64);
        MetricReport {
            precision: ratio(tp, tp + fp),
            recall: ratio(tp, tp + fn_),
            f1: ratio(2.0 * tp, 2.0 * tp + fp + fn_),
            accuracy: ratio(tp + tn, tp + tn + fp + fn_),
            miou: 0.5 * (ratio(tp, tp + fp + fn_) + ratio(tn, tn + fn_ + fp)),
            runtime_ms: None,
        }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

/// An empty denominator yields 0 rather than NaN.
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    /// Mean of the ground and non-ground IoU.
    pub miou: f64,
    /// Mean pipeline time per scan, when measured.
    pub runtime_ms: Option<f64>,
}

impl MetricReport {
    pub fn with_runtime(mut self, runtime_ms: f64) -> Self {
        self.runtime_ms = Some(runtime_ms);
        self
    }
}

/// Count one scan. Points whose truth class is ignored are skipped.
pub fn confusion_counts(predicted: &[bool], truth: &[u32], mapping: &LabelMapping) -> Result<ConfusionCounts> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "predicted labels",
            got: predicted.len(),
            expected: truth.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predicted.iter().zip(truth) {
        match mapping.classify(t) {
            TruthClass::Ignored => {}
            TruthClass::Ground => c.record(p, true),
            TruthClass::NonGround => c.record(p, false),
        }
    }
    Ok(c)
}

pub fn compute_metrics(
    predicted: &[bool],
    truth: &[u32],
    mapping: &LabelMapping,
) -> Result<(ConfusionCounts, MetricReport)> {
    let c = confusion_counts(predicted, truth, mapping)?;
    if c.total() == 0 {
        return Err(Error::NoEvaluablePoints);
    }
    Ok((c, c.report()))
}

/// Micro aggregation: sum the counts, then compute the metrics once.
pub fn aggregate_metrics(per_scan: &[ConfusionCounts]) -> MetricReport {
    per_scan.iter().copied().sum::<ConfusionCounts>().report()
}

const COLUMNS: [&str; 6] = ["precision", "recall", "f1", "accuracy", "miou", "runtime_ms"];

fn row_values(r: &MetricReport) -> [String; 6] {
    let pct = |v: f64| format!("{:.2}", 100.0 * v);
    [
        pct(r.precision),
        pct(r.recall),
        pct(r.f1),
        pct(r.accuracy),
        pct(r.miou),
        r.runtime_ms.map_or_else(|| "-".to_string(), |t| format!("{t:.3}")),
    ]
}

/// Aligned plain-text table; metric columns are percentages.
pub fn format_table(rows: &[(String, MetricReport)]) -> String {
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = write!(out, "{:<name_w$}", "name");
    for c in COLUMNS {
        let _ = write!(out, "  {c:>10}");
    }
    out.push('\n');
    for (name, r) in rows {
        let _ = write!(out, "{name:<name_w$}");
        for v in row_values(r) {
            let _ = write!(out, "  {v:>10}");
        }
        out.push('\n');
    }
    out
}

/// CSV with raw fractions.
pub fn format_csv(rows: &[(String, MetricReport)]) -> String {
    let mut out = String::from("name,precision,recall,f1,accuracy,miou,runtime_ms\n");
    for (name, r) in rows {
        let rt = r.runtime_ms.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{},{rt}",
            r.precision, r.recall, r.f1, r.accuracy, r.miou
        );
    }
    out
}

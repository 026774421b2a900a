// SPDX-License-Identifier: Apache-2.0

//! Binary scan and label files.
//!
//! Scans are little-endian `f32` quadruples `(x, y, z, intensity)`, 16 bytes
//! per point. Labels are one little-endian `u32` per point; the semantic
//! class is the lower 16 bits and the upper 16 bits carry an instance id.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;

const POINT_BYTES: usize = 16;

/// A scan with optional per-point intensity and class ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScanRecord {
    pub points: Vec<Point3>,
    pub intensity: Option<Vec<f32>>,
    pub classes: Option<Vec<u32>>,
}

impl ScanRecord {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn read_point_cloud_bin(path: impl AsRef<Path>) -> Result<ScanRecord> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_point_cloud_bin(&bytes, path)
}

pub(crate) fn parse_point_cloud_bin(bytes: &[u8], path: &Path) -> Result<ScanRecord> {
    if !bytes.len().is_multiple_of(POINT_BYTES) {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: (bytes.len() - bytes.len() % POINT_BYTES) as u64,
        });
    }
    let n = bytes.len() / POINT_BYTES;
    let mut points = Vec::with_capacity(n);
    let mut intensity = Vec::with_capacity(n);
    let mut bad = Vec::new();
    for (k, rec) in bytes.chunks_exact(POINT_BYTES).enumerate() {
        let f = |o: usize| f32::from_le_bytes([rec[o], rec[o + 1], rec[o + 2], rec[o + 3]]);
        let (x, y, z, w) = (f(0), f(4), f(8), f(12));
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            bad.push(k);
        }
        points.push(Point3::new(x as f64, y as f64, z as f64));
        intensity.push(w);
    }
    if !bad.is_empty() {
        return Err(Error::NonFinite {
            path: path.to_path_buf(),
            indices: bad,
        });
    }
    Ok(ScanRecord {
        points,
        intensity: Some(intensity),
        classes: None,
    })
}

/// Write points as `f32` quadruples. Missing intensity is written as 0.
pub fn write_point_cloud_bin(path: impl AsRef<Path>, points: &[Point3], intensity: Option<&[f32]>) -> Result<()> {
    let path = path.as_ref();
    if let Some(w) = intensity {
        if w.len() != points.len() {
            return Err(Error::LengthMismatch {
                what: "intensity",
                got: w.len(),
                expected: points.len(),
            });
        }
    }
    let mut buf = Vec::with_capacity(points.len() * POINT_BYTES);
    for (k, p) in points.iter().enumerate() {
        let w = intensity.map_or(0.0, |w| w[k]);
        for v in [p.x as f32, p.y as f32, p.z as f32, w] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Semantic class ids (lower 16 bits) of a label file.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            offset: (bytes.len() - bytes.len() % 4) as u64,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]) & 0xFFFF)
        .collect())
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for l in labels {
        w.write_all(&l.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

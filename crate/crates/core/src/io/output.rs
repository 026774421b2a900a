// SPDX-License-Identifier: Apache-2.0

//! Segmentation outputs: per-point CSV, colored ASCII PLY and the node
//! elevation map.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::elevation::NodeHeightMap;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::pipeline::SegmentationResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    ColoredPly,
}

impl OutputFormat {
    /// Guess from a file extension; anything other than `.ply` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => OutputFormat::ColoredPly,
            _ => OutputFormat::Csv,
        }
    }
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "ply" => Ok(OutputFormat::ColoredPly),
            other => Err(format!("unknown output format {other:?} (expected csv or ply)")),
        }
    }
}

const GROUND_RGB: [u8; 3] = [0, 200, 0];
const OBJECT_RGB: [u8; 3] = [220, 0, 0];

pub fn write_segmentation(
    result: &SegmentationResult,
    scan: &[Point3],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    if result.len() != scan.len() {
        return Err(Error::LengthMismatch {
            what: "segmentation result",
            got: result.len(),
            expected: scan.len(),
        });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = match format {
        OutputFormat::Csv => write_csv(&mut w, result, scan),
        OutputFormat::ColoredPly => write_ply(&mut w, result, scan),
    };
    res.and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn write_csv(w: &mut impl Write, result: &SegmentationResult, scan: &[Point3]) -> std::io::Result<()> {
    writeln!(w, "index,x,y,z,label,elevation")?;
    for (k, p) in scan.iter().enumerate() {
        write!(w, "{k},{},{},{},{},", p.x, p.y, p.z, u8::from(result.ground[k]))?;
        if let Some(e) = result.elevation[k] {
            write!(w, "{e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn write_ply(w: &mut impl Write, result: &SegmentationResult, scan: &[Point3]) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "comment green = ground, red = non-ground")?;
    writeln!(w, "element vertex {}", scan.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    for c in ["red", "green", "blue"] {
        writeln!(w, "property uchar {c}")?;
    }
    writeln!(w, "end_header")?;
    for (k, p) in scan.iter().enumerate() {
        let [r, g, b] = if result.ground[k] { GROUND_RGB } else { OBJECT_RGB };
        writeln!(w, "{} {} {} {r} {g} {b}", p.x as f32, p.y as f32, p.z as f32)?;
    }
    Ok(())
}

/// One row per node, segment-major, `L * (M + 1)` rows after the header.
pub fn export_elevation_map(nodes: &NodeHeightMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_elevation_map(&mut w, nodes)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_elevation_map(w: &mut impl Write, nodes: &NodeHeightMap) -> std::io::Result<()> {
    writeln!(w, "i,j,node_x,node_y,height")?;
    for i in 0..nodes.num_segments() {
        for j in 0..nodes.num_rows() {
            let (x, y) = nodes.position(i, j);
            match nodes.height(i, j) {
                Some(h) => writeln!(w, "{i},{j},{x},{y},{h}")?,
                None => writeln!(w, "{i},{j},{x},{y},undefined")?,
            }
        }
    }
    Ok(())
}

// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for the `polarseg` binary.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (I/O,
//! parsing, invalid configuration). Diagnostics go to stderr; data goes to
//! the requested paths or stdout.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::eval::{
    benchmark_runtime, format_csv, format_search_csv, format_table, grid_search, synth_scene, ConfusionCounts,
    LabeledScan, MetricReport, MirrorPatch, Occluder, ParamGrid, SceneSpec, Terrain,
};
use crate::geometry::Point3;
use crate::io::{
    export_elevation_map, load_config, read_labels, read_point_cloud_bin, write_labels, write_point_cloud_bin,
    write_segmentation, LabelMapping, OutputFormat,
};
use crate::pipeline::{SegmentationConfig, Segmenter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "polarseg", version, about = "LiDAR ground segmentation on a polar grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Segment one scan and write per-point labels.
    Segment(SegmentArgs),
    /// Score predictions against per-point truth labels.
    Evaluate(EvaluateArgs),
    /// Time the pipeline stages on a single thread.
    Benchmark(BenchmarkArgs),
    /// Rank parameter combinations by mean per-scan F1.
    Gridsearch(GridsearchArgs),
    /// Generate a synthetic scan with truth labels.
    Synth(SynthArgs),
    /// Write the node elevation map of one scan as CSV.
    ExportElevation(ExportArgs),
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Segmentation config (TOML).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
}

#[derive(Debug, Args)]
struct SegmentArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Input scan, KITTI .bin layout.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// csv or ply; guessed from the output extension when omitted.
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
struct LabeledInput {
    /// Directory of .bin scans.
    #[arg(long, value_name = "DIR")]
    scans: PathBuf,
    /// Directory of .label files with the same stems.
    #[arg(long, value_name = "DIR")]
    labels: PathBuf,
    /// Class mapping (TOML); SemanticKITTI when omitted.
    #[arg(long, value_name = "FILE")]
    mapping: Option<PathBuf>,
    /// Use only the first N scans in name order.
    #[arg(long, value_name = "N")]
    limit: Option<usize>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    input: LabeledInput,
    /// Worker threads; scans are processed concurrently.
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Also write the table as CSV.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// A .bin scan or a directory of them.
    #[arg(long, value_name = "PATH")]
    scans: PathBuf,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_name = "N")]
    limit: Option<usize>,
}

#[derive(Debug, Args)]
struct GridsearchArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[command(flatten)]
    input: LabeledInput,
    /// `standard` for the 3125-combination preset, or a TOML file of axes.
    #[arg(long, default_value = "standard")]
    grid: String,
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Ranked CSV destination; stdout when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TerrainKind {
    Flat,
    Inclined,
    Curved,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Writes NAME.bin and NAME.label here.
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
    #[arg(long, default_value = "000000")]
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = TerrainKind::Flat)]
    terrain: TerrainKind,
    #[arg(long, default_value_t = 6.0)]
    slope_deg: f64,
    #[arg(long, default_value_t = 0.0)]
    heading_deg: f64,
    /// Curvature radius of the curved terrain, meters.
    #[arg(long, default_value_t = 200.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    /// Box standing on the ground: cx,cy,size_x,size_y,height. Repeatable.
    #[arg(long = "box", value_name = "CX,CY,SX,SY,H", value_parser = parse_box)]
    boxes: Vec<[f64; 5]>,
    /// Reflection patch: r_min,r_max,az_min_deg,az_max_deg,depth. Repeatable.
    #[arg(long = "mirror", value_name = "R0,R1,A0,A1,D", value_parser = parse_mirror)]
    mirrors: Vec<MirrorPatch>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_box(s: &str) -> std::result::Result<[f64; 5], String> {
    parse_floats::<5>(s)
}

fn parse_mirror(s: &str) -> std::result::Result<MirrorPatch, String> {
    let [r_min, r_max, azimuth_min_deg, azimuth_max_deg, depth] = parse_floats::<5>(s)?;
    Ok(MirrorPatch {
        r_min,
        r_max,
        azimuth_min_deg,
        azimuth_max_deg,
        depth,
    })
}

/// Parse `argv` (program name first), run the command, return the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Segment(a) => segment(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Gridsearch(a) => gridsearch(a),
        Command::Synth(a) => synth(a),
        Command::ExportElevation(a) => export_elevation(a),
    }
}

fn segment(a: SegmentArgs) -> Result<()> {
    let segmenter = Segmenter::new(load_config(&a.config.config)?)?;
    let scan = read_point_cloud_bin(&a.input)?;
    let result = segmenter.segment(&scan.points)?;
    let format = a.format.unwrap_or_else(|| OutputFormat::from_path(&a.out));
    write_segmentation(&result, &scan.points, &a.out, format)?;
    eprintln!(
        "{}: {} of {} points ground, {} out of range, {:.3} ms",
        a.input.display(),
        result.num_ground(),
        result.len(),
        result.out_of_range,
        result.timings.total_us / 1e3
    );
    Ok(())
}

fn list_scans(path: &Path, limit: Option<usize>) -> Result<Vec<PathBuf>> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut bins: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    bins.sort();
    if let Some(n) = limit {
        bins.truncate(n);
    }
    if bins.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "no .bin scans found".into(),
        });
    }
    Ok(bins)
}

fn load_mapping(path: Option<&Path>) -> Result<LabelMapping> {
    path.map_or_else(|| Ok(LabelMapping::semantic_kitti()), LabelMapping::load)
}

fn load_labeled(input: &LabeledInput) -> Result<Vec<(String, LabeledScan)>> {
    list_scans(&input.scans, input.limit)?
        .into_iter()
        .map(|bin| {
            let stem = bin.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let label = input.labels.join(format!("{stem}.label"));
            let points = read_point_cloud_bin(&bin)?.points;
            let classes = read_labels(&label)?;
            if classes.len() != points.len() {
                return Err(Error::LengthMismatch {
                    what: "label file",
                    got: classes.len(),
                    expected: points.len(),
                });
            }
            Ok((stem, LabeledScan { points, classes }))
        })
        .collect()
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|p| p.install(f))
            .map_err(|e| Error::Config(format!("thread pool: {e}"))),
        None => Ok(f()),
    }
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let segmenter = Segmenter::new(load_config(&a.config.config)?)?;
    let mapping = load_mapping(a.input.mapping.as_deref())?;
    let scans = load_labeled(&a.input)?;
    let per_scan = with_threads(a.threads, || {
        scans
            .par_iter()
            .map(|(name, s)| {
                let r = segmenter.segment(&s.points)?;
                let (c, _) = crate::eval::compute_metrics(&r.ground, &s.classes, &mapping)?;
                Ok((name.clone(), c, r.timings.total_us / 1e3))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut rows: Vec<(String, MetricReport)> =
        per_scan.iter().map(|(n, c, ms)| (n.clone(), c.report().with_runtime(*ms))).collect();
    let total: ConfusionCounts = per_scan.iter().map(|(_, c, _)| *c).sum();
    let mean_ms = per_scan.iter().map(|(_, _, ms)| ms).sum::<f64>() / per_scan.len() as f64;
    rows.push(("micro".to_string(), total.report().with_runtime(mean_ms)));
    print!("{}", format_table(&rows));
    if let Some(path) = &a.csv {
        std::fs::write(path, format_csv(&rows)).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let config = load_config(&a.config.config)?;
    let scans: Vec<Vec<Point3>> = list_scans(&a.scans, a.limit)?
        .iter()
        .map(|p| read_point_cloud_bin(p).map(|s| s.points))
        .collect::<Result<_>>()?;
    let report = benchmark_runtime(&scans, &config, a.repeats)?;
    print!("{}", report.format_table());
    Ok(())
}

/// Axes file for a custom search; omitted axes keep the config's value.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    delta_alpha_deg: Option<Vec<f64>>,
    m: Option<Vec<usize>>,
    t_delta_slope_deg: Option<Vec<f64>>,
    t_delta_r: Option<Vec<f64>>,
    t_z: Option<Vec<f64>>,
}

fn load_param_grid(spec: &str, base: &SegmentationConfig) -> Result<ParamGrid> {
    if spec == "standard" {
        return Ok(ParamGrid::standard_ranges(base.grid.r_max()));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let f: GridFile = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let d = ParamGrid::from_config(base);
    Ok(ParamGrid {
        delta_alpha_deg: f.delta_alpha_deg.unwrap_or(d.delta_alpha_deg),
        m: f.m.unwrap_or(d.m),
        t_delta_slope_deg: f.t_delta_slope_deg.unwrap_or(d.t_delta_slope_deg),
        t_delta_r: f.t_delta_r.unwrap_or(d.t_delta_r),
        t_z: f.t_z.unwrap_or(d.t_z),
    })
}

fn gridsearch(a: GridsearchArgs) -> Result<()> {
    let base = load_config(&a.config.config)?;
    let grid = load_param_grid(&a.grid, &base)?;
    let mapping = load_mapping(a.input.mapping.as_deref())?;
    let scans: Vec<LabeledScan> = load_labeled(&a.input)?.into_iter().map(|(_, s)| s).collect();
    eprintln!("{} combinations over {} scans", grid.len(), scans.len());
    let rows = grid_search(&scans, &mapping, &base, &grid, a.threads)?;
    let csv = format_search_csv(&rows);
    match &a.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::io(path, e))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let terrain = match a.terrain {
        TerrainKind::Flat => Terrain::Flat,
        TerrainKind::Inclined => Terrain::Inclined {
            slope_deg: a.slope_deg,
            heading_deg: a.heading_deg,
        },
        TerrainKind::Curved => Terrain::Curved { radius: a.radius },
    };
    let mut spec = SceneSpec::flat(a.seed).with_terrain(terrain).with_noise(a.noise);
    for [cx, cy, sx, sy, h] in a.boxes {
        let base_z = spec.surface_height(cx, cy);
        spec = spec.with_occluder(Occluder::standing(cx, cy, base_z, sx, sy, h));
    }
    for m in a.mirrors {
        spec = spec.with_mirror(m);
    }
    let scene = synth_scene(&spec)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let bin = a.out_dir.join(format!("{}.bin", a.name));
    let label = a.out_dir.join(format!("{}.label", a.name));
    write_point_cloud_bin(&bin, scene.points(), None)?;
    write_labels(&label, scene.classes())?;
    eprintln!("{}: {} points, {}", bin.display(), scene.points().len(), scene.description);
    Ok(())
}

fn export_elevation(a: ExportArgs) -> Result<()> {
    let segmenter = Segmenter::new(load_config(&a.config.config)?)?;
    let scan = read_point_cloud_bin(&a.input)?;
    let result = segmenter.segment(&scan.points)?;
    export_elevation_map(&result.nodes, &a.out)
}

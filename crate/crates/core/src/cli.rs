//! The `conflict` command line.
//!
//! Exit codes: 0 on success or a PASS verdict, 1 on a FAIL verdict, 2 on
//! usage or input errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::config;
use crate::conflict::{
    complex_to_csv, complex_to_obj, extract_conflict_2d, extract_conflict_3d, ComplexSidecar, ConflictComplex, ExtractError,
};
use crate::geom::{AxisBox, Vec3};
use crate::metrics::{dimension_check, embedding_scan_scene, link_components, no_cusp_check, MetricsError};
use crate::scene::{parse_scene, scene_to_json, Scene, SceneError};
use crate::scenes;
use crate::spherical::{spherical_conflict, support_sets, SphericalComplex, SphericalError, SupportSet};
use crate::tangent::{verify_tangent_cone, TangentError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Scene(#[from] SceneError),

    #[error(transparent)]
    Extract(#[from] ExtractError),

    #[error(transparent)]
    Spherical(#[from] SphericalError),

    #[error(transparent)]
    Tangent(#[from] TangentError),

    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Parser, Debug)]
#[command(name = "conflict", version, about = "Conflict sets of disjoint closed sets in R² and R³")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, PartialEq)]
pub enum Command {
    /// Extract the conflict set in a window (CSV in 2D, OBJ in 3D, JSON sidecar).
    Extract,
    /// Supports of every site at a base point.
    Supports,
    /// Geodesic conflict set of the supports on the unit sphere.
    SphereConf,
    /// Compare rescaled sphere slices with the spherical conflict set.
    VerifyTangent,
    /// Inner/outer distance ratios at shrinking scales.
    Embedding,
    /// Branch tangents of a planar conflict set at a point.
    NoCusp,
    /// Connected components of the slice by a small sphere.
    Link,
    /// Check that extracted cells have codimension one.
    DimCheck,
    /// Built-in demonstration (`paper-example`).
    Demo { name: String },
}

/// Options shared by all subcommands; unset values fall back to the defaults in [`config`].
#[derive(Args, Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    /// Scene file (JSON).
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Window as xmin,xmax,ymin,ymax[,zmin,zmax].
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Grid resolution (cells per axis); sample count or icosphere level for sphere-conf.
    #[arg(long, global = true)]
    pub res: Option<usize>,
    /// Base point x,y[,z].
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub at: Option<Vec<f64>>,
    /// Sphere radii, largest first.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Angular scales for the embedding scan, largest first.
    #[arg(long, global = true, value_delimiter = ',')]
    pub scales: Option<Vec<f64>>,
    /// Acceptance tolerance for verify-tangent.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Minimum branch angle in degrees for no-cusp.
    #[arg(long, global = true)]
    pub min_angle: Option<f64>,
    /// Seed for randomized probes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output base path; files get a suffix per artifact.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Path of the JSON report (defaults to `<out>.json`).
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Worker threads for the grid kernels.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let workers = cli.config.workers.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli.command, &cli.config)) {
        Ok(Outcome { stdout, pass }) => {
            print!("{stdout}");
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Outcome {
    stdout: String,
    pass: bool,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, pass: true }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    validate(cfg)?;
    match command {
        Command::Extract => extract(cfg),
        Command::Supports => supports(cfg),
        Command::SphereConf => sphere_conf(cfg),
        Command::VerifyTangent => verify_tangent(cfg),
        Command::Embedding => embedding(cfg),
        Command::NoCusp => no_cusp(cfg),
        Command::Link => link(cfg),
        Command::DimCheck => dim_check(cfg),
        Command::Demo { name } => demo(name, cfg),
    }
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let positive = |name: &str, v: Option<f64>| match v {
        Some(x) if !(x > 0.0) || !x.is_finite() => Err(CliError::Usage(format!("--{name} must be positive, got {x}"))),
        _ => Ok(()),
    };
    positive("tol", cfg.tol)?;
    positive("min-angle", cfg.min_angle)?;
    for (name, list) in [("eps", &cfg.eps), ("scales", &cfg.scales)] {
        if let Some(l) = list {
            if l.is_empty() || l.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(CliError::Usage(format!("--{name} values must be positive")));
            }
        }
    }
    if cfg.workers == Some(0) {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    Ok(())
}

fn load_scene(cfg: &RunConfig) -> Result<Scene<f64>, CliError> {
    let path = cfg.scene.as_ref().ok_or_else(|| CliError::Usage("missing --scene".into()))?;
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
    Ok(parse_scene(&text)?)
}

fn point(cfg: &RunConfig, dim: usize) -> Result<Vec3<f64>, CliError> {
    let at = cfg.at.as_ref().ok_or_else(|| CliError::Usage("missing --at".into()))?;
    if at.len() != dim {
        return Err(CliError::Usage(format!("--at needs {dim} coordinates, got {}", at.len())));
    }
    Ok(Vec3::from_f64_slice(at).expect("length checked"))
}

fn window(cfg: &RunConfig, dim: usize, default: AxisBox<f64>) -> Result<AxisBox<f64>, CliError> {
    let Some(w) = &cfg.window else {
        return Ok(default);
    };
    if w.len() != 2 * dim {
        return Err(CliError::Usage(format!("--window needs {} numbers, got {}", 2 * dim, w.len())));
    }
    let mut min = Vec3::zero();
    let mut max = Vec3::zero();
    for k in 0..dim {
        min.set(k, w[2 * k]);
        max.set(k, w[2 * k + 1]);
    }
    let b = AxisBox::new(min, max);
    if !b.is_valid(dim) {
        return Err(CliError::Usage("--window must have min < max on every axis".into()));
    }
    Ok(b)
}

fn extract_any(scene: &Scene<f64>, window: AxisBox<f64>, res: usize) -> Result<ConflictComplex<f64>, ExtractError> {
    if scene.dimension() == 2 {
        extract_conflict_2d(scene, window, res)
    } else {
        extract_conflict_3d(scene, window, res)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let err = |source| CliError::Write { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(err)?;
    }
    fs::write(path, text).map_err(err)
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut s = base.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn to_json<R: Serialize>(report: &R) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes the report to `--report` (or `<out>.json`) and returns it for stdout.
fn emit_report<R: Serialize>(cfg: &RunConfig, report: &R) -> Result<String, CliError> {
    let text = to_json(report);
    let target = cfg.report.clone().or_else(|| cfg.out.as_ref().map(|o| with_suffix(o, ".json")));
    if let Some(path) = target {
        write_file(&path, &text)?;
    }
    Ok(text)
}

fn default_window(dim: usize) -> AxisBox<f64> {
    AxisBox::centered(Vec3::zero(), 2.0, dim)
}

fn extract(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let dim = scene.dimension();
    let w = window(cfg, dim, default_window(dim))?;
    let res = cfg.res.unwrap_or(if dim == 2 { 128 } else { 48 });
    let complex = extract_any(&scene, w, res)?;
    let geometry = if dim == 2 { complex_to_csv(&complex) } else { complex_to_obj(&complex) };
    let Some(base) = &cfg.out else {
        return Ok(Outcome::ok(geometry));
    };
    let ext = if dim == 2 { ".csv" } else { ".obj" };
    write_file(&with_suffix(base, ext), &geometry)?;
    write_file(&with_suffix(base, ".json"), &ComplexSidecar::from_complex(&complex).to_json())?;
    Ok(Outcome::ok(to_json(&complex_summary(&complex))))
}

fn complex_summary(c: &ConflictComplex<f64>) -> serde_json::Value {
    json!({
        "dimension": c.dimension,
        "resolution": c.resolution,
        "vertices": c.vertices.len(),
        "cells": c.cells.len(),
        "flagged": c.flagged.len(),
        "max_residual": c.max_residual(),
        "tie_area_fraction": c.tie_area_fraction,
    })
}

#[derive(Serialize)]
struct SupportRecord {
    site: usize,
    id: String,
    sampled: bool,
    points: Vec<Vec<f64>>,
    directions: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct SupportReport {
    x0: Vec<f64>,
    r0: f64,
    achieving: Vec<usize>,
    excluded: Vec<usize>,
    supports: Vec<SupportRecord>,
}

fn support_report(s: &SupportSet<f64>) -> SupportReport {
    let d = s.dimension;
    SupportReport {
        x0: s.x0.to_f64_vec(d),
        r0: s.r0,
        achieving: s.achieving.clone(),
        excluded: s.excluded(),
        supports: s
            .supports
            .iter()
            .map(|sp| SupportRecord {
                site: sp.site,
                id: sp.id.clone(),
                sampled: sp.sampled,
                points: sp.points.iter().map(|p| p.to_f64_vec(d)).collect(),
                directions: sp.directions.iter().map(|u| u.to_f64_vec(d)).collect(),
            })
            .collect(),
    }
}

fn coords_csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = format!("{header}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

fn supports(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let x0 = point(cfg, scene.dimension())?;
    let s = support_sets(&scene, &x0)?;
    let report = support_report(&s);
    if let Some(base) = &cfg.out {
        let axes = if s.dimension == 2 { "ux,uy" } else { "ux,uy,uz" };
        let csv = coords_csv(
            &format!("site,{axes}"),
            report.supports.iter().flat_map(|sp| {
                sp.directions.iter().map(move |u| {
                    std::iter::once(sp.site.to_string()).chain(u.iter().map(|c| c.to_string())).collect()
                })
            }),
        );
        write_file(&with_suffix(base, ".csv"), &csv)?;
    }
    Ok(Outcome::ok(emit_report(cfg, &report)?))
}

#[derive(Serialize)]
struct SphereVertex {
    direction: Vec<f64>,
    residual: f64,
    sites: Vec<usize>,
}

#[derive(Serialize)]
struct SphereReport {
    dimension: usize,
    x0: Vec<f64>,
    r0: f64,
    vertices: Vec<SphereVertex>,
    cells: Vec<Vec<usize>>,
    pairs: Vec<(usize, usize)>,
    flagged: usize,
    excluded: Vec<usize>,
}

fn sphere_report(c: &SphericalComplex<f64>) -> SphereReport {
    let d = c.dimension;
    SphereReport {
        dimension: d,
        x0: c.x0.to_f64_vec(d),
        r0: c.r0,
        vertices: c
            .vertices
            .iter()
            .map(|v| SphereVertex { direction: v.position.to_f64_vec(d), residual: v.residual, sites: v.sites.clone() })
            .collect(),
        cells: c.cells.iter().map(|cell| cell.vertices.clone()).collect(),
        pairs: c.cells.iter().map(|cell| cell.pair).collect(),
        flagged: c.flagged,
        excluded: c.excluded.clone(),
    }
}

fn sphere_conf(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let dim = scene.dimension();
    let x0 = point(cfg, dim)?;
    let s = support_sets(&scene, &x0)?;
    let res = cfg.res.unwrap_or(if dim == 2 { config::CIRCLE_SAMPLES } else { config::ICOSPHERE_LEVEL });
    let c = spherical_conflict(&s, res)?;
    let report = sphere_report(&c);
    if let Some(base) = &cfg.out {
        if dim == 2 {
            let csv = coords_csv(
                "ux,uy,residual,pair_i,pair_j",
                report.vertices.iter().map(|v| {
                    let mut row: Vec<String> = v.direction.iter().map(|c| c.to_string()).collect();
                    row.push(v.residual.to_string());
                    row.push(v.sites[0].to_string());
                    row.push(v.sites[1].to_string());
                    row
                }),
            );
            write_file(&with_suffix(base, ".csv"), &csv)?;
        } else {
            let mut obj = String::new();
            for v in &report.vertices {
                let _ = writeln!(obj, "v {} {} {}", v.direction[0], v.direction[1], v.direction[2]);
            }
            for cell in &report.cells {
                let ids: Vec<String> = cell.iter().map(|i| (i + 1).to_string()).collect();
                let _ = writeln!(obj, "l {}", ids.join(" "));
            }
            write_file(&with_suffix(base, ".obj"), &obj)?;
        }
    }
    Ok(Outcome::ok(emit_report(cfg, &report)?))
}

const DEFAULT_EPS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];
const DEFAULT_SCALES: [f64; 3] = [0.4, 0.2, 0.1];

fn verify_tangent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let x0 = point(cfg, scene.dimension())?;
    let eps = cfg.eps.clone().unwrap_or(DEFAULT_EPS.to_vec());
    let res = cfg.res.unwrap_or(config::TANGENT_RESOLUTION);
    let tol = cfg.tol.unwrap_or(config::TANGENT_ACCEPT_TOL);
    let report = verify_tangent_cone(&scene, &x0, &eps, res, tol)?;
    let text = emit_report(cfg, &report)?;
    Ok(Outcome { stdout: text, pass: report.verdict == "PASS" })
}

fn require_conflict_point(scene: &Scene<f64>, x0: &Vec3<f64>) -> Result<(), CliError> {
    let (_, achieving) = crate::spherical::min_distance_profile(scene, x0)?;
    if achieving.len() < 2 {
        return Err(TangentError::NotConflictPoint(achieving).into());
    }
    Ok(())
}

fn embedding(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let x0 = point(cfg, scene.dimension())?;
    require_conflict_point(&scene, &x0)?;
    let scales = cfg.scales.clone().unwrap_or(DEFAULT_SCALES.to_vec());
    let res = cfg.res.unwrap_or(config::EMBEDDING_RESOLUTION);
    let seed = cfg.seed.unwrap_or(config::DEFAULT_SEED);
    let report = embedding_scan_scene(&scene, &x0, &scales, res, seed)?;
    Ok(Outcome::ok(emit_report(cfg, &report)?))
}

fn no_cusp(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let y0 = point(cfg, scene.dimension())?;
    let eps = cfg.eps.clone().unwrap_or(vec![0.2, 0.1, 0.05]);
    let min_angle = cfg.min_angle.unwrap_or(config::MIN_BRANCH_ANGLE_DEG);
    let res = cfg.res.unwrap_or(config::BRANCH_RESOLUTION);
    let report = no_cusp_check(&scene, &y0, &eps, min_angle, res)?;
    let text = emit_report(cfg, &report)?;
    Ok(Outcome { stdout: text, pass: report.verdict == "PASS" })
}

fn link(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let dim = scene.dimension();
    let x0 = point(cfg, dim)?;
    require_conflict_point(&scene, &x0)?;
    let eps = match cfg.eps.as_deref() {
        None => 0.2,
        Some([e]) => *e,
        Some(_) => return Err(CliError::Usage("link takes a single --eps value".into())),
    };
    let w = window(cfg, dim, AxisBox::centered(x0, eps * 2.5, dim))?;
    let res = cfg.res.unwrap_or(config::EMBEDDING_RESOLUTION);
    let complex = extract_any(&scene, w, res)?;
    let components = link_components(&complex, &x0, eps)?;
    let report = json!({ "x0": x0.to_f64_vec(dim), "eps": eps, "resolution": res, "components": components });
    Ok(Outcome::ok(emit_report(cfg, &report)?))
}

fn dim_check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scene = load_scene(cfg)?;
    let dim = scene.dimension();
    let w = window(cfg, dim, default_window(dim))?;
    let res = cfg.res.unwrap_or(if dim == 2 { 128 } else { 48 });
    let complex = extract_any(&scene, w, res)?;
    let report = dimension_check(&complex);
    let text = emit_report(cfg, &report)?;
    Ok(Outcome { stdout: text, pass: report.verdict == "PASS" })
}

/// The two-sheet example: extraction, tangent-cone check, embedding scan and
/// link counts of the germ and of its cone.
fn demo(name: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    if name != "paper-example" {
        return Err(CliError::Usage(format!("unknown demo {name:?} (available: paper-example)")));
    }
    let base = cfg.out.clone().unwrap_or_else(|| PathBuf::from("paper-example"));
    let scene = scenes::two_sheet_example::<f64>();
    let x0 = Vec3::zero();
    let res = cfg.res.unwrap_or(config::TANGENT_RESOLUTION);
    let seed = cfg.seed.unwrap_or(config::DEFAULT_SEED);
    let link_eps = 0.2;

    let complex = extract_conflict_3d(&scene, AxisBox::centered(x0, 0.5, 3), res)?;
    let eps = cfg.eps.clone().unwrap_or(DEFAULT_EPS.to_vec());
    let tol = cfg.tol.unwrap_or(config::TANGENT_ACCEPT_TOL);
    let tangent = verify_tangent_cone(&scene, &x0, &eps, res, tol)?;
    let scales = cfg.scales.clone().unwrap_or(DEFAULT_SCALES.to_vec());
    let embedding = embedding_scan_scene(&scene, &x0, &scales, res, seed)?;
    let germ_link = link_components(&complex, &x0, link_eps)?;
    let cone = scenes::transversal_planes_complex::<f64>(0.5, 48);
    let cone_link = link_components(&cone, &x0, link_eps)?;
    let link = json!({ "eps": link_eps, "germ_components": germ_link, "cone_components": cone_link });

    let files = [
        ("_scene.json", scene_to_json(&scene)),
        ("_complex.obj", complex_to_obj(&complex)),
        ("_complex.json", ComplexSidecar::from_complex(&complex).to_json()),
        ("_tangent.json", to_json(&tangent)),
        ("_embedding.json", to_json(&embedding)),
        ("_link.json", to_json(&link)),
    ];
    for (suffix, text) in &files {
        write_file(&with_suffix(&base, suffix), text)?;
    }
    let pass = tangent.verdict == "PASS" && embedding.verdict == "diverging" && germ_link == 2 && cone_link == 1;
    let summary = json!({
        "demo": name,
        "complex": complex_summary(&complex),
        "tangent_verdict": tangent.verdict,
        "embedding_verdict": embedding.verdict,
        "embedding_ratios": embedding.ratios,
        "link": link,
        "verdict": if pass { "PASS" } else { "FAIL" },
    });
    let text = to_json(&summary);
    write_file(&with_suffix(&base, "_summary.json"), &text)?;
    Ok(Outcome { stdout: text, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_parse_with_negative_numbers() {
        let cli = Cli::try_parse_from(["conflict", "extract", "--window", "-2,2,-2,2", "--at", "-1,0", "--res", "64"]).unwrap();
        assert_eq!(cli.command, Command::Extract);
        assert_eq!(cli.config.window, Some(vec![-2.0, 2.0, -2.0, 2.0]));
        assert_eq!(cli.config.at, Some(vec![-1.0, 0.0]));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["conflict", "frobnicate"]), 2);
        assert_eq!(run(["conflict", "extract", "--bogus"]), 2);
        assert_eq!(run(["conflict", "extract"]), 2);
        assert_eq!(run(["conflict", "extract", "--scene", "/nonexistent/scene.json"]), 2);
        assert_eq!(run(["conflict", "verify-tangent", "--tol", "-1"]), 2);
    }

    #[test]
    fn window_must_match_dimension() {
        let cfg = RunConfig { window: Some(vec![0.0, 1.0]), ..Default::default() };
        assert!(window(&cfg, 2, default_window(2)).is_err());
        let cfg = RunConfig { window: Some(vec![1.0, 0.0, 0.0, 1.0]), ..Default::default() };
        assert!(window(&cfg, 2, default_window(2)).is_err());
    }
}

//! Command-line front end. `main.rs` only forwards `std::env::args_os()` here.
//!
//! Exit codes: 0 success or all checks passed, 1 runtime error or failed
//! check, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::lattice::{generate_fcc_cell, generate_fcc_cell_with_radius, generate_fig2_array, SpherePack};
use crate::mesh::{export_obj, export_stl, mesh_body, quality, DEFAULT_DEPTH};
use crate::metrics::{
    body_metrics, cell_volume_residual, ccp_density, octa_corner_excess, packing_identity_residual,
    stt_metrics, sto_metrics, stt_sto_volume_ratio, tetra_corner_excess, weighted_average_density,
    BodyMetrics,
};
use crate::oracle::{
    cuboctahedron_projection_areas, mc_cell_fractions, mc_planar_face_area, mc_spherical_patch_area,
    mc_volume, EstimateRow,
};
use crate::regions::{BodyKind, VoidBody};
use crate::sampling::RNG_ALGORITHM;
use crate::tiling::{cell_tiling, enclose_sphere, verify_partition};
use crate::walk::{q_line, simulate, Reflection, WalkConfig};

/// Environment variable read when `--threads` is not given.
pub const THREADS_ENV: &str = "CCP_VOIDS_THREADS";

const EXACT_TOL: f64 = 1e-12;
const CENTRAL_SPHERE: usize = 4;

#[derive(Debug, Parser)]
#[command(name = "ccp-voids", version, about = "Void bodies of cubic close packing")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Also write a run manifest to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form areas, volumes and densities.
    Metrics(MetricsArgs),
    /// Exact identities and the sampled partition check.
    Verify(VerifyArgs),
    /// Write a triangle mesh of one body.
    Mesh(MeshArgs),
    /// Monte Carlo estimate of a closed-form quantity.
    Oracle(OracleArgs),
    /// Random walk in the pore space of a periodic FCC pack.
    Walk(WalkArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BodyChoice {
    Stt,
    Sto,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub body: BodyChoice,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identity,
    Projection,
    Cell,
    Partition,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    /// Samples for the partition check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeshBody {
    Stt,
    Sto,
}

impl From<MeshBody> for BodyKind {
    fn from(b: MeshBody) -> Self {
        match b {
            MeshBody::Stt => BodyKind::Stt,
            MeshBody::Sto => BodyKind::Sto,
        }
    }
}

#[derive(Debug, Args)]
pub struct MeshArgs {
    #[arg(long, value_enum)]
    pub body: MeshBody,
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: u32,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Output file; the extension (.obj or .stl) picks the format.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    SttVol,
    StoVol,
    SttPatch,
    StoPatch,
    SttFace,
    StoFace,
    Cell,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub target: Target,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Conventional cells per axis.
    #[arg(long, default_value_t = 1)]
    pub cells: usize,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1_000)]
    pub walkers: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "specular")]
    pub reflection: ReflectionChoice,
    /// Trailing fraction of the MSD series used for the slope fit.
    #[arg(long, default_value_t = 0.5)]
    pub fit_window: f64,
    /// Wave-vector `qx,qy,qz` for the propagator; repeatable.
    #[arg(long = "q", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub q: Vec<[f64; 3]>,
    /// Evenly spaced wave-vectors `ax,ay,az:q_max:count` from 0 along an axis.
    #[arg(long, value_parser = parse_q_line, allow_hyphen_values = true)]
    pub q_line: Option<(Vec3, f64, usize)>,
    #[arg(long)]
    pub out: PathBuf,
    /// Same box with no spheres, for calibrating free diffusion.
    #[arg(long, hide = true)]
    pub empty_pack: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReflectionChoice {
    Specular,
    Reject,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest_path: PathBuf,
    /// Replace the recorded `--out` path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| format!("expected qx,qy,qz, got {s:?}"))
}

fn parse_q_line(s: &str) -> std::result::Result<(Vec3, f64, usize), String> {
    let fields: Vec<&str> = s.split(':').collect();
    let [axis, q_max, count] = fields[..] else {
        return Err(format!("expected ax,ay,az:q_max:count, got {s:?}"));
    };
    let axis = Vec3::from(parse_vec3(axis)?);
    if axis.norm() == 0.0 {
        return Err("axis must be non-zero".into());
    }
    let q_max = q_max.parse().map_err(|e| format!("q_max: {e}"))?;
    let count = count.parse().map_err(|e| format!("count: {e}"))?;
    Ok((axis, q_max, count))
}

/// Record of one run, sufficient to reproduce its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    /// Arguments that reproduce the run, seed included.
    pub argv: Vec<String>,
    pub rng: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, &(serde_json::to_string_pretty(self)? + "\n"))
    }
}

/// What a command produced.
struct Outcome {
    report: String,
    pass: bool,
    seed: Option<u64>,
    parameters: BTreeMap<String, Value>,
    outputs: Vec<PathBuf>,
    /// Where the command writes its own manifest, if it always does.
    own_manifest: Option<PathBuf>,
}

impl Outcome {
    fn new(report: String, parameters: Value) -> Self {
        let parameters = match parameters {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Outcome {
            report,
            pass: true,
            seed: None,
            parameters,
            outputs: Vec::new(),
            own_manifest: None,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>() >> 11;
        eprintln!("seed: {s}");
        s
    })
}

fn cmd_metrics(a: &MetricsArgs) -> Result<Outcome> {
    let kinds: &[BodyKind] = match a.body {
        BodyChoice::Stt => &[BodyKind::Stt],
        BodyChoice::Sto => &[BodyKind::Sto],
        BodyChoice::Both => &[BodyKind::Stt, BodyKind::Sto],
    };
    let bodies: Vec<BodyMetrics> = kinds
        .iter()
        .map(|&k| body_metrics(k, a.radius))
        .collect::<Result<_>>()?;
    let report = match a.format {
        Format::Json => pretty(&json!({
            "bodies": bodies,
            "volume_ratio_stt_sto": stt_sto_volume_ratio(),
            "weighted_average_density": weighted_average_density(),
            "ccp_density": ccp_density(),
        }))?,
        Format::Csv => {
            let mut s = String::from(
                "kind,radius,surface_area,volume,area_rel_sphere,vol_rel_sphere,phi,planar_area,spherical_area\n",
            );
            for m in &bodies {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    m.kind, m.radius, m.surface_area, m.volume, m.area_rel_sphere, m.vol_rel_sphere,
                    m.phi, m.planar_area, m.spherical_area
                )
                .unwrap();
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for m in &bodies {
                writeln!(s, "{} (R = {})", m.kind.to_string().to_uppercase(), m.radius).unwrap();
                writeln!(s, "  surface area    {:.6}  ({:.6} of the sphere)", m.surface_area, m.area_rel_sphere).unwrap();
                writeln!(s, "  volume          {:.6}  ({:.6} of the sphere)", m.volume, m.vol_rel_sphere).unwrap();
                writeln!(s, "  sector density  {:.6}", m.phi).unwrap();
            }
            writeln!(s, "V_STT / V_STO     {:.6}", stt_sto_volume_ratio()).unwrap();
            writeln!(s, "weighted density  {:.6}", weighted_average_density()).unwrap();
            s
        }
    };
    Ok(Outcome::new(
        report,
        json!({ "body": name(&a.body), "radius": a.radius, "format": name(&a.format) }),
    ))
}

#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    check: &'static str,
    value: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

fn check(suite: &'static str, name: &'static str, value: f64, expected: f64, tolerance: f64) -> Check {
    Check {
        suite,
        check: name,
        value,
        expected,
        tolerance,
        pass: (value - expected).abs() <= tolerance,
    }
}

fn identity_checks() -> Vec<Check> {
    let pi = std::f64::consts::PI;
    vec![
        check("identity", "6 acos(17/81) + 8 acos(23/27) - 4pi", packing_identity_residual(), 0.0, EXACT_TOL),
        check("identity", "(2 phi_STO + phi_STT)/3", weighted_average_density(), pi / 18f64.sqrt(), EXACT_TOL),
        check("identity", "acos(17/81) - 2 acos(7/9)", octa_corner_excess() - 2.0 * (7.0f64 / 9.0).acos(), 0.0, EXACT_TOL),
    ]
}

fn projection_checks() -> Result<Vec<Check>> {
    let p = cuboctahedron_projection_areas()?;
    let worst = |areas: &[f64], exact: f64| {
        areas.iter().map(|a| (a - exact).abs()).fold(0.0, f64::max)
    };
    Ok(vec![
        check("projection", "square faces", p.square_areas.len() as f64, 6.0, 0.0),
        check("projection", "triangle faces", p.triangle_areas.len() as f64, 8.0, 0.0),
        check("projection", "max |square - acos(17/81)|", worst(&p.square_areas, octa_corner_excess()), 0.0, EXACT_TOL),
        check("projection", "max |triangle - acos(23/27)|", worst(&p.triangle_areas, tetra_corner_excess()), 0.0, EXACT_TOL),
        check("projection", "total", p.total, 4.0 * std::f64::consts::PI, EXACT_TOL),
    ])
}

fn cell_checks() -> Result<Vec<Check>> {
    let tiling = cell_tiling(&generate_fcc_cell(1)?)?;
    let stt = stt_metrics(1.0)?;
    let sto = sto_metrics(1.0)?;
    let parts: f64 = tiling.bodies().iter().map(|b| match b.kind() {
        BodyKind::Stt => stt.volume,
        BodyKind::Sto => sto.volume,
    }).sum::<f64>() + 4.0 * crate::metrics::sphere_volume(1.0);
    Ok(vec![
        check("cell", "4 spheres + 8 STT + 4 STO - cell volume", cell_volume_residual(), 0.0, EXACT_TOL),
        check("cell", "STT sites per cell", tiling.count(BodyKind::Stt) as f64, 8.0, 0.0),
        check("cell", "STO sites per cell", tiling.count(BodyKind::Sto) as f64, 4.0, 0.0),
        check("cell", "site bodies + spheres - cell volume", parts - tiling.domain_volume(), 0.0, EXACT_TOL),
    ])
}

fn partition_checks(samples: u64, seed: u64) -> Result<(Vec<Check>, Value)> {
    let assembly = enclose_sphere(&generate_fig2_array(), CENTRAL_SPHERE)?;
    let r = verify_partition(&assembly, samples, seed, crate::regions::DEFAULT_EPS)?;
    let checks = vec![
        check("partition", "STO bodies", assembly.count(BodyKind::Sto) as f64, 6.0, 0.0),
        check("partition", "STT bodies", assembly.count(BodyKind::Stt) as f64, 8.0, 0.0),
        check("partition", "overlap points", r.overlaps as f64, 0.0, 0.0),
        check("partition", "gap points", r.gaps as f64, 0.0, 0.0),
    ];
    Ok((checks, serde_json::to_value(r)?))
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut partition = Value::Null;
    let mut seed = None;
    let all = a.suite == Suite::All;
    if all || a.suite == Suite::Identity {
        checks.extend(identity_checks());
    }
    if all || a.suite == Suite::Projection {
        checks.extend(projection_checks()?);
    }
    if all || a.suite == Suite::Cell {
        checks.extend(cell_checks()?);
    }
    if all || a.suite == Suite::Partition {
        if a.samples == 0 {
            return Err(Error::InvalidArgument("need at least one sample".into()));
        }
        let s = resolve_seed(a.seed);
        seed = Some(s);
        let (c, report) = partition_checks(a.samples, s)?;
        checks.extend(c);
        partition = report;
    }
    let pass = checks.iter().all(|c| c.pass);
    let report = pretty(&json!({ "pass": pass, "checks": checks, "partition": partition }))?;
    let mut out = Outcome::new(report, json!({ "suite": name(&a.suite), "samples": a.samples }));
    out.pass = pass;
    out.seed = seed;
    Ok(out)
}

fn cmd_mesh(a: &MeshArgs) -> Result<Outcome> {
    let ext = a.out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let body = VoidBody::canonical(a.body.into(), a.radius)?;
    let mesh = mesh_body(&body, a.depth)?;
    match ext.as_deref() {
        Some("obj") => export_obj(&mesh, &a.out)?,
        Some("stl") => export_stl(&mesh, &a.out)?,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "output {:?} must end in .obj or .stl",
                a.out
            )))
        }
    }
    let q = quality(&mesh, &body)?;
    let report = pretty(&q)?;
    let quality_path = sibling(&a.out, "quality.json");
    write_file(&quality_path, &report)?;
    let mut out = Outcome::new(
        report,
        json!({ "body": body.kind(), "depth": a.depth, "radius": a.radius, "out": a.out }),
    );
    out.pass = q.is_watertight;
    out.outputs = vec![a.out.clone(), quality_path];
    out.own_manifest = Some(sibling(&a.out, "manifest.json"));
    Ok(out)
}

/// `dir/name.ext` -> `dir/name.ext.suffix`
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_oracle(a: &OracleArgs) -> Result<Outcome> {
    let seed = resolve_seed(a.seed);
    let n = a.samples;
    let stt = VoidBody::canonical_stt(1.0)?;
    let sto = VoidBody::canonical_sto(1.0)?;
    let ms = stt_metrics(1.0)?;
    let mo = sto_metrics(1.0)?;
    let mut fractions = Value::Null;
    let rows: Vec<EstimateRow> = match a.target {
        Target::SttVol => vec![mc_volume(&stt, n, seed)?.row("stt_volume", ms.volume)],
        Target::StoVol => vec![mc_volume(&sto, n, seed)?.row("sto_volume", mo.volume)],
        Target::SttPatch => {
            vec![mc_spherical_patch_area(&stt, 0, n, seed)?.row("stt_spherical_patch_area", ms.spherical_area / 4.0)]
        }
        Target::StoPatch => {
            vec![mc_spherical_patch_area(&sto, 0, n, seed)?.row("sto_spherical_patch_area", mo.spherical_area / 6.0)]
        }
        Target::SttFace => vec![mc_planar_face_area(&stt, 0, n, seed)?.row("stt_planar_face_area", ms.planar_area / 4.0)],
        Target::StoFace => vec![mc_planar_face_area(&sto, 0, n, seed)?.row("sto_planar_face_area", mo.planar_area / 8.0)],
        Target::Cell => {
            let pack = generate_fcc_cell_with_radius(1, 1.0)?;
            let tiling = cell_tiling(&pack)?;
            let f = mc_cell_fractions(&pack, tiling.bodies(), n, seed)?;
            let cell = tiling.domain_volume();
            fractions = serde_json::to_value(f)?;
            vec![
                f.estimate(f.sphere_frac).row("sphere_fraction", ccp_density()),
                f.estimate(f.stt_frac).row("stt_fraction", 8.0 * ms.volume / cell),
                f.estimate(f.sto_frac).row("sto_fraction", 4.0 * mo.volume / cell),
            ]
        }
    };
    let report = pretty(&json!({ "estimates": rows, "cell_fractions": fractions }))?;
    let mut out = Outcome::new(report, json!({ "target": name(&a.target), "samples": n }));
    out.seed = Some(seed);
    Ok(out)
}

fn cmd_walk(a: &WalkArgs) -> Result<Outcome> {
    let seed = resolve_seed(a.seed);
    let full = generate_fcc_cell(a.cells)?;
    let pack = if a.empty_pack {
        SpherePack::periodic(full.radius(), full.cell_edge().unwrap(), Vec::new())?
    } else {
        full
    };
    let mut qs = a.q.clone();
    if let Some((axis, q_max, count)) = a.q_line {
        qs.extend(q_line(axis, q_max, count).into_iter().map(|q| [q.x, q.y, q.z]));
    }
    let cfg = WalkConfig {
        step_length: a.step,
        n_steps: a.steps,
        n_walkers: a.walkers,
        seed,
        reflection: match a.reflection {
            ReflectionChoice::Specular => Reflection::Specular,
            ReflectionChoice::Reject => Reflection::Reject,
        },
        q_samples: (!qs.is_empty()).then_some(qs),
        fit_window: a.fit_window,
    };
    let result = simulate(&pack, &cfg)?;

    let mut outputs = Vec::new();
    let mut msd = String::from("step,msd\n");
    for (k, m) in result.msd.iter().enumerate() {
        writeln!(msd, "{k},{m}").unwrap();
    }
    let msd_path = a.out.join("msd.csv");
    write_file(&msd_path, &msd)?;
    outputs.push(msd_path);
    if let Some(points) = &result.propagator_magnitude {
        let mut csv = String::from("qx,qy,qz,magnitude\n");
        for p in points {
            writeln!(csv, "{},{},{},{}", p.q[0], p.q[1], p.q[2], p.magnitude).unwrap();
        }
        let path = a.out.join("propagator.csv");
        write_file(&path, &csv)?;
        outputs.push(path);
    }
    let summary = json!({
        "d_eff_ratio": result.d_eff_ratio,
        "final_msd": result.msd.last(),
        "n_reflections": result.n_reflections,
        "n_discarded_steps": result.n_discarded_steps,
        "min_clearance": result.min_clearance,
    });
    let mut echo = serde_json::to_value(&cfg)?;
    if let Some(qs) = echo.as_object_mut().and_then(|o| o.remove("q_samples")) {
        echo["q_count"] = json!(qs.as_array().map_or(0, Vec::len));
    }
    let report = pretty(&json!({ "config": echo, "result": summary }))?;
    let mut params = json!({
        "cells": a.cells,
        "empty_pack": a.empty_pack,
        "config": cfg,
        "result": summary,
    });
    params["out"] = json!(a.out);
    let mut out = Outcome::new(report, params);
    out.seed = Some(seed);
    out.outputs = outputs;
    out.own_manifest = Some(a.out.join("manifest.json"));
    Ok(out)
}

/// Arguments with the global flags removed and the resolved seed pinned.
fn replay_argv(args: &[String], seed: Option<u64>) -> Vec<String> {
    let mut kept = Vec::new();
    let mut it = args.iter().skip(1);
    let mut has_seed = false;
    while let Some(a) = it.next() {
        if a == "--manifest" || a == "--threads" {
            it.next();
            continue;
        }
        if a.starts_with("--manifest=") || a.starts_with("--threads=") {
            continue;
        }
        has_seed |= a == "--seed" || a.starts_with("--seed=");
        kept.push(a.clone());
    }
    if let (Some(s), false) = (seed, has_seed) {
        kept.push("--seed".into());
        kept.push(s.to_string());
    }
    kept
}

fn with_out(mut argv: Vec<String>, out: &Path) -> Vec<String> {
    let out = out.to_string_lossy().into_owned();
    if let Some(i) = argv.iter().position(|a| a == "--out") {
        if i + 1 < argv.len() {
            argv[i + 1] = out;
            return argv;
        }
    }
    argv.retain(|a| !a.starts_with("--out="));
    argv.push("--out".into());
    argv.push(out);
    argv
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<(Outcome, Vec<String>)> {
    let outcome = match &cli.command {
        Command::Metrics(a) => cmd_metrics(a)?,
        Command::Verify(a) => cmd_verify(a)?,
        Command::Mesh(a) => cmd_mesh(a)?,
        Command::Oracle(a) => cmd_oracle(a)?,
        Command::Walk(a) => cmd_walk(a)?,
        Command::Replay(a) => {
            let m = RunManifest::read(&a.manifest_path)?;
            let mut recorded = m.argv.clone();
            if let Some(out) = &a.out {
                recorded = with_out(recorded, out);
            }
            let mut full = vec!["ccp-voids".to_string()];
            full.extend(recorded);
            let inner = Cli::try_parse_from(&full)
                .map_err(|e| Error::InvalidArgument(format!("manifest arguments do not parse: {e}")))?;
            if matches!(inner.command, Command::Replay(_)) {
                return Err(Error::InvalidArgument("a manifest cannot replay another replay".into()));
            }
            return dispatch(&inner, &full);
        }
    };
    let replay = replay_argv(argv, outcome.seed);
    Ok((outcome, replay))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Metrics(_) => "metrics",
        Command::Verify(_) => "verify",
        Command::Mesh(_) => "mesh",
        Command::Oracle(_) => "oracle",
        Command::Walk(_) => "walk",
        Command::Replay(_) => "replay",
    }
}

fn run_parsed(cli: &Cli, argv: &[String]) -> Result<bool> {
    let (outcome, replay) = dispatch(cli, argv)?;
    {
        use std::io::Write as _;
        // A closed pipe (`| head`) is not an error worth reporting.
        let mut stdout = std::io::stdout().lock();
        let _ = stdout.write_all(outcome.report.as_bytes());
        if !outcome.report.ends_with('\n') {
            let _ = stdout.write_all(b"\n");
        }
    }
    let command = replay.first().cloned().unwrap_or_else(|| command_name(&cli.command).into());
    let mut manifest = RunManifest {
        command,
        parameters: outcome.parameters,
        seed: outcome.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outcome.outputs,
        argv: replay,
        rng: RNG_ALGORITHM.to_string(),
    };
    let targets: Vec<PathBuf> = outcome.own_manifest.into_iter().chain(cli.manifest.clone()).collect();
    manifest.outputs.extend(targets.iter().cloned());
    for path in &targets {
        manifest.write(path)?;
    }
    Ok(outcome.pass)
}

/// Parses `args` (program name first), runs the command and maps the result
/// to an exit code.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(1);
        }
    }
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run_parsed(&cli, &argv) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

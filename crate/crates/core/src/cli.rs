//! The `membrane` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 tolerance failure,
//! 3 runtime failure (lost immersion, stagnation, I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use serde::Serialize;

use crate::diffgeo::{audit_identities, identity_fields, GeometryBundle, IDENTITIES};
use crate::energy::{conjugates, density, total_energy, EnergyModel};
use crate::error::{ConfigError, GeometryError};
use crate::flow::{neck_radius, run_flow, FlowError};
use crate::io::{
    timestamp, write_json, write_manifest, write_node_csv, write_obj, write_residual_csv,
    write_stress_csv, write_trajectory_csv, Format, LoadError, Manifest, RunConfig, ALL_FORMATS,
    FlowOptions,
};
use crate::stress::{boundary_force, residuals, stress_from_conjugates, ResidualNorms};

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "MEMBRANE_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_TOLERANCE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

const DEFAULT_AUDIT_TOL: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "membrane", version, about = "Stress, shape residuals and flows of curvature-elastic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residuals of the structural identities of the sampled surface.
    Audit(CommonArgs),
    /// Conserved stress and its divergence residuals.
    Stress(CommonArgs),
    /// Total energy and the energy density per node.
    Energy(CommonArgs),
    /// Force transmitted across a coordinate circle.
    Force(CommonArgs),
    /// Gradient flow toward an equilibrium shape.
    Flow(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json,csv,obj.
    #[arg(long, value_delimiter = ',')]
    pub formats: Option<Vec<Format>>,
    /// Tolerance for the pass/fail exit code.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Audit(_) => "audit",
            Command::Stress(_) => "stress",
            Command::Energy(_) => "energy",
            Command::Force(_) => "force",
            Command::Flow(_) => "flow",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Audit(a)
            | Command::Stress(a)
            | Command::Energy(a)
            | Command::Force(a)
            | Command::Flow(a) => a,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Flow(FlowError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Load(_) | Failure::Config(_) => EXIT_CONFIG,
            Failure::Flow(FlowError::Config(_)) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Resolved run: configuration plus output settings.
struct Run {
    command: &'static str,
    config: RunConfig,
    out: PathBuf,
    formats: Vec<Format>,
    tol: Option<f64>,
    outputs: Vec<String>,
}

impl Run {
    fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.out.join(name)
    }

    fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        if self.wants(Format::Json) {
            let p = self.path(name);
            write_json(&p, value)?;
        }
        Ok(())
    }

    fn finish(&self, code: u8) -> std::io::Result<()> {
        let manifest = Manifest {
            tool: "membrane",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: &self.config,
            formats: &self.formats,
            outputs: self.outputs.clone(),
            exit_code: i32::from(code),
            timestamp: timestamp(),
        };
        write_manifest(&self.out, &manifest)
    }
}

fn prepare(cmd: &Command) -> Result<Run, Failure> {
    let args = cmd.args();
    let mut config = RunConfig::load(&args.config)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let formats = args
        .formats
        .clone()
        .or_else(|| config.formats.clone())
        .unwrap_or_else(|| ALL_FORMATS.to_vec());
    let tol = args.tol.or(config.tol);
    config.out = Some(out.clone());
    config.formats = Some(formats.clone());
    config.tol = tol;
    std::fs::create_dir_all(&out)?;
    Ok(Run {
        command: cmd.name(),
        config,
        out,
        formats,
        tol,
        outputs: Vec::new(),
    })
}

fn cmd_audit(run: &mut Run) -> Result<u8, Failure> {
    let emb = run.config.embedding()?;
    let b = GeometryBundle::from_embedding(&emb)?;
    let report = audit_identities(&emb, &b);
    let tol = run.tol.unwrap_or(DEFAULT_AUDIT_TOL);
    run.config.tol = Some(tol);
    run.json("identities.json", &report)?;
    if run.wants(Format::Csv) {
        let fields = identity_fields(&emb, &b);
        let p = run.path("identities.csv");
        write_node_csv(&p, &b.grid, &IDENTITIES, |i| fields.iter().map(|f| f[i]).collect())?;
    }
    if run.wants(Format::Obj) {
        let p = run.path("surface.obj");
        write_obj(&p, &emb)?;
    }
    for e in &report.entries {
        info!("{:<20} max {:e}  rms {:e}", e.name, e.max_residual, e.l2_residual);
    }
    if report.within(tol) {
        Ok(EXIT_OK)
    } else {
        let worst = report
            .entries
            .iter()
            .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
            .expect("identity list is not empty");
        warn!(
            "{} residual {:e} at node {:?} exceeds {tol:e}",
            worst.name, worst.max_residual, worst.worst_node
        );
        Ok(EXIT_TOLERANCE)
    }
}

#[derive(Serialize)]
struct StressSummary<'a> {
    model: &'a EnergyModel,
    residuals: ResidualNorms,
}

fn cmd_stress(run: &mut Run) -> Result<u8, Failure> {
    let model = run.config.require_model()?;
    let emb = run.config.embedding()?;
    let b = GeometryBundle::from_embedding(&emb)?;
    let stress = stress_from_conjugates(&b, &conjugates(&model, &b));
    let res = residuals(&b, &stress);
    let norms = res.norms(&b);
    info!("shape residual max {:e}, tangential max {:e}", norms.shape_max, norms.tangential_max);
    run.json("residual_norms.json", &StressSummary { model: &model, residuals: norms })?;
    if run.wants(Format::Csv) {
        let p = run.path("stress.csv");
        write_stress_csv(&p, &b.grid, &stress)?;
        let p = run.path("residuals.csv");
        write_residual_csv(&p, &b.grid, &res)?;
    }
    if run.wants(Format::Obj) {
        let p = run.path("surface.obj");
        write_obj(&p, &emb)?;
    }
    Ok(match run.tol {
        Some(tol) if !(norms.shape_max <= tol && norms.tangential_max <= tol) => EXIT_TOLERANCE,
        _ => EXIT_OK,
    })
}

#[derive(Serialize)]
struct EnergySummary<'a> {
    model: &'a EnergyModel,
    energy: f64,
    area: f64,
}

fn cmd_energy(run: &mut Run) -> Result<u8, Failure> {
    let model = run.config.require_model()?;
    let emb = run.config.embedding()?;
    let b = GeometryBundle::from_embedding(&emb)?;
    let energy = total_energy(&model, &b);
    let area = b.area_weights().iter().sum();
    info!("energy {energy}");
    run.json("energy.json", &EnergySummary { model: &model, energy, area })?;
    if run.wants(Format::Csv) {
        let d = density(&model, &b);
        let w = b.area_weights();
        let p = run.path("density.csv");
        write_node_csv(&p, &b.grid, &["density", "area_weight"], |i| vec![d[i], w[i]])?;
    }
    if run.wants(Format::Obj) {
        let p = run.path("surface.obj");
        write_obj(&p, &emb)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ForceSummary {
    force: [f64; 3],
    magnitude: f64,
}

fn cmd_force(run: &mut Run) -> Result<u8, Failure> {
    let model = run.config.require_model()?;
    let curve = run
        .config
        .curve
        .ok_or(ConfigError::Parameter {
            name: "curve",
            value: f64::NAN,
            reason: "the force command needs a `curve` entry",
        })?;
    let emb = run.config.embedding()?;
    let b = GeometryBundle::from_embedding(&emb)?;
    let stress = stress_from_conjugates(&b, &conjugates(&model, &b));
    let f = boundary_force(&b, &stress, curve)?;
    info!("force ({}, {}, {})", f.x, f.y, f.z);
    run.json(
        "force.json",
        &ForceSummary {
            force: [f.x, f.y, f.z],
            magnitude: f.norm(),
        },
    )?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FlowSummary {
    converged: bool,
    steps: usize,
    energy: f64,
    max_shape_residual: f64,
    dt: f64,
    sigma: f64,
    rejected: usize,
    smoothings: usize,
    neck_radius: Option<f64>,
}

fn cmd_flow(run: &mut Run) -> Result<u8, Failure> {
    let model = run.config.require_model()?;
    let emb = run.config.embedding()?;
    let opts = run.config.flow.clone().unwrap_or_default();
    let config = opts.resolve(model, &emb.grid)?;
    let rings = opts.clamp_rings.unwrap_or(1);
    run.config.flow = Some(FlowOptions::resolved_from(&config, rings));
    let report = match run_flow(&emb, &config) {
        Ok(r) => r,
        Err(e) => {
            if let Some(last) = e.last_state() {
                if run.wants(Format::Obj) {
                    let p = run.path("last_valid.obj");
                    write_obj(&p, &last.emb)?;
                }
            }
            return Err(Failure::Flow(e));
        }
    };
    let axisymmetric = matches!(
        run.config.surface,
        crate::chart::SurfaceSpec::Cylinder { .. } | crate::chart::SurfaceSpec::Catenoid { .. }
    );
    let summary = FlowSummary {
        converged: report.converged,
        steps: report.state.step,
        energy: report.state.energy,
        max_shape_residual: report.state.max_shape_residual,
        dt: report.state.dt,
        sigma: report.sigma,
        rejected: report.rejected,
        smoothings: report.smoothings,
        neck_radius: axisymmetric.then(|| neck_radius(&report.state.emb)),
    };
    run.json("flow.json", &summary)?;
    if run.wants(Format::Csv) {
        let p = run.path("trajectory.csv");
        write_trajectory_csv(&p, &report.trajectory)?;
    }
    if run.wants(Format::Obj) {
        let p = run.path("final.obj");
        write_obj(&p, &report.state.emb)?;
    }
    Ok(if report.converged { EXIT_OK } else { EXIT_TOLERANCE })
}

fn execute(cmd: &Command) -> u8 {
    let mut run = match prepare(cmd) {
        Ok(r) => r,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            return e.code();
        }
    };
    let result = match cmd {
        Command::Audit(_) => cmd_audit(&mut run),
        Command::Stress(_) => cmd_stress(&mut run),
        Command::Energy(_) => cmd_energy(&mut run),
        Command::Force(_) => cmd_force(&mut run),
        Command::Flow(_) => cmd_flow(&mut run),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.code()
    });
    if let Err(e) = run.finish(code) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_RUNTIME;
    }
    code
}

/// Sizes the global worker pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() -> Result<(), String> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| format!("{THREADS_ENV}={v} is not a thread count"))?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| e.to_string())
        }
        Err(_) => Ok(()),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    execute(&cli.command)
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::from(run(std::env::args_os()))
}


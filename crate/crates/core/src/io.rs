//! Run configuration and file writers (JSON, CSV, OBJ, manifest).
//!
//! Floats are written with Rust's shortest round-trip formatting, so output
//! files are byte-identical for identical inputs.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chart::{EmbeddingField, Grid, SurfaceSpec};
use crate::energy::EnergyModel;
use crate::error::ConfigError;
use crate::flow::{edge_rings, FlowConfig, TrajectoryRecord};
use crate::stress::{CurveSpec, ResidualField, StressField};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Obj,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "obj" => Ok(Format::Obj),
            other => Err(format!("unknown format `{other}` (expected json, csv or obj)")),
        }
    }
}

pub const ALL_FORMATS: [Format; 3] = [Format::Json, Format::Csv, Format::Obj];

/// Node counts of the chart grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n1: usize,
    pub n2: usize,
}

/// Moves one node after sampling, for fault-injection runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub node: [usize; 2],
    pub offset: [f64; 3],
}

/// Flow options; unset fields take the [`FlowConfig::new`] defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowOptions {
    pub dt0: Option<f64>,
    pub max_steps: Option<usize>,
    pub tol: Option<f64>,
    pub dt_shrink: Option<f64>,
    pub dt_grow: Option<f64>,
    pub smooth_every: Option<usize>,
    pub smooth_strength: Option<f64>,
    pub record_every: Option<usize>,
    /// Rows held fixed along every clamped edge.
    pub clamp_rings: Option<usize>,
    pub residual_halo: Option<usize>,
}

impl FlowOptions {
    pub fn resolve(&self, model: EnergyModel, grid: &Grid) -> Result<FlowConfig, ConfigError> {
        let mut c = FlowConfig::new(model, grid);
        if let Some(v) = self.dt0 {
            c.dt0 = v;
        }
        if let Some(v) = self.max_steps {
            c.max_steps = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.dt_shrink {
            c.dt_shrink = v;
        }
        if let Some(v) = self.dt_grow {
            c.dt_grow = v;
        }
        if let Some(v) = self.smooth_every {
            c.smooth_every = v;
        }
        if let Some(v) = self.smooth_strength {
            c.smooth_strength = v;
        }
        if let Some(v) = self.record_every {
            c.record_every = v;
        }
        if let Some(v) = self.clamp_rings {
            c.clamp_mask = edge_rings(grid, v);
        }
        if let Some(v) = self.residual_halo {
            c.residual_halo = v;
        }
        c.validate(grid)?;
        Ok(c)
    }

    /// Copy with every field filled in from `config`.
    pub fn resolved_from(config: &FlowConfig, clamp_rings: usize) -> Self {
        FlowOptions {
            dt0: Some(config.dt0),
            max_steps: Some(config.max_steps),
            tol: Some(config.tol),
            dt_shrink: Some(config.dt_shrink),
            dt_grow: Some(config.dt_grow),
            smooth_every: Some(config.smooth_every),
            smooth_strength: Some(config.smooth_strength),
            record_every: Some(config.record_every),
            clamp_rings: Some(clamp_rings),
            residual_halo: Some(config.residual_halo),
        }
    }
}

/// Input of every CLI command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceSpec,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<EnergyModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<CurveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<Perturbation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<Format>>,
}

/// Configuration file failure, with the parser's line and column.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

impl RunConfig {
    pub fn from_json(path: &Path, text: &str) -> Result<Self, LoadError> {
        serde_json::from_str(text).map_err(|e| {
            let message = e.to_string();
            let message = match message.rfind(" at line ") {
                Some(cut) => message[..cut].to_string(),
                None => message,
            };
            LoadError::Parse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message,
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = fs::read_to_string(path).map_err(|source| LoadError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(path, &text)
    }

    pub fn build_grid(&self) -> Result<Grid, ConfigError> {
        self.surface.validate()?;
        self.surface.natural_grid(self.grid.n1, self.grid.n2)
    }

    /// Samples the surface and applies the optional perturbation.
    pub fn embedding(&self) -> Result<EmbeddingField, ConfigError> {
        let grid = self.build_grid()?;
        let mut emb = self.surface.sample(&grid)?;
        if let Some(p) = self.perturb {
            let [i1, i2] = p.node;
            if i1 >= grid.n[0] || i2 >= grid.n[1] {
                return Err(ConfigError::NodeIndex { node: p.node, n: grid.n });
            }
            emb.x[grid.index(i1, i2)] += Vec3::from(p.offset);
            emb = EmbeddingField::new(grid, emb.x)?;
        }
        Ok(emb)
    }

    pub fn require_model(&self) -> Result<EnergyModel, ConfigError> {
        self.model
            .clone()
            .ok_or_else(|| ConfigError::Model("missing key `model`".into()))
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

fn csv_writer(path: &Path) -> io::Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(io::Error::other)
}

/// Writes one row per node: `i1, i2` followed by `columns(node)`.
pub fn write_node_csv(
    path: &Path,
    grid: &Grid,
    header: &[&str],
    mut columns: impl FnMut(usize) -> Vec<f64>,
) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    let mut head = vec!["i1", "i2"];
    head.extend_from_slice(header);
    w.write_record(&head).map_err(io::Error::other)?;
    for idx in 0..grid.len() {
        let (i1, i2) = grid.coords(idx);
        let mut row = vec![i1.to_string(), i2.to_string()];
        row.extend(columns(idx).iter().map(f64::to_string));
        w.write_record(&row).map_err(io::Error::other)?;
    }
    w.flush()
}

pub fn write_stress_csv(path: &Path, grid: &Grid, s: &StressField) -> io::Result<()> {
    let header = [
        "f11", "f12", "f21", "f22", "f1", "f2", "fw1_x", "fw1_y", "fw1_z", "fw2_x", "fw2_y", "fw2_z",
    ];
    write_node_csv(path, grid, &header, |i| {
        let t = &s.f_tan[i];
        let [w1, w2] = s.f_world[i];
        vec![
            t[(0, 0)],
            t[(0, 1)],
            t[(1, 0)],
            t[(1, 1)],
            s.f_nor[i][0],
            s.f_nor[i][1],
            w1.x,
            w1.y,
            w1.z,
            w2.x,
            w2.y,
            w2.z,
        ]
    })
}

pub fn write_residual_csv(path: &Path, grid: &Grid, r: &ResidualField) -> io::Result<()> {
    let header = ["shape", "tangential1", "tangential2", "div_x", "div_y", "div_z"];
    write_node_csv(path, grid, &header, |i| {
        let t = r.tangential[i];
        let d = r.direct_div[i];
        vec![r.shape[i], t[0], t[1], d.x, d.y, d.z]
    })
}

pub fn write_trajectory_csv(path: &Path, records: &[TrajectoryRecord]) -> io::Result<()> {
    let mut w = csv_writer(path)?;
    for r in records {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

/// Wavefront OBJ: vertices in row-major node order, each grid quad split into
/// two triangles along its `(i1, i2)`-`(i1+1, i2+1)` diagonal. Periodic
/// directions wrap around.
pub fn write_obj(path: &Path, emb: &EmbeddingField) -> io::Result<()> {
    let mut out = io::BufWriter::new(fs::File::create(path)?);
    write_obj_to(&mut out, emb)?;
    out.flush()
}

pub fn write_obj_to(out: &mut impl Write, emb: &EmbeddingField) -> io::Result<()> {
    let grid = &emb.grid;
    for x in &emb.x {
        writeln!(out, "v {} {} {}", x.x, x.y, x.z)?;
    }
    let quads = |d: usize| match grid.bc[d] {
        crate::chart::Boundary::Periodic => grid.n[d],
        crate::chart::Boundary::Clamped => grid.n[d] - 1,
    };
    for i1 in 0..quads(0) {
        for i2 in 0..quads(1) {
            let j1 = (i1 + 1) % grid.n[0];
            let j2 = (i2 + 1) % grid.n[1];
            let v = |a: usize, b: usize| grid.index(a, b) + 1;
            let (v00, v10, v11, v01) = (v(i1, i2), v(j1, i2), v(j1, j2), v(i1, j2));
            writeln!(out, "f {v00} {v10} {v11}")?;
            writeln!(out, "f {v00} {v11} {v01}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub formats: &'a [Format],
    pub outputs: Vec<String>,
    pub exit_code: i32,
    /// Seconds since the Unix epoch; the only non-reproducible field.
    pub timestamp: u64,
}

pub fn write_manifest(dir: &Path, manifest: &Manifest) -> io::Result<()> {
    write_json(&dir.join("manifest.json"), manifest)
}

pub fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

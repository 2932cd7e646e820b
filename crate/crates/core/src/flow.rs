//! Normal gradient flow `X <- X - dt sigma eps n` with backtracking, used to
//! find equilibrium shapes.

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{Boundary, EmbeddingField, Grid};
use crate::diffgeo::{norms, GeometryBundle};
use crate::energy::{conjugates, total_energy, EnergyModel};
use crate::error::{ConfigError, GeometryError};
use crate::stress::{residuals, stress_from_conjugates};
use crate::{Vec2, Vec3};

/// Smallest step, relative to `dt0`, before the flow reports stagnation.
pub const DT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub model: EnergyModel,
    pub dt0: f64,
    /// Accepted steps before giving up.
    pub max_steps: usize,
    /// Stop once `max |eps|` over the free nodes is at or below this.
    pub tol: f64,
    pub dt_shrink: f64,
    /// Factor applied to `dt` after an accepted step; 1 keeps it fixed.
    pub dt_grow: f64,
    /// Tangential smoothing cadence in accepted steps; 0 disables it.
    pub smooth_every: usize,
    pub smooth_strength: f64,
    /// Trajectory sampling cadence; the first and last states are always kept.
    pub record_every: usize,
    /// Nodes that never move.
    pub clamp_mask: Vec<bool>,
    /// Free nodes closer than this to a clamped edge are left out of the
    /// stopping norm (they still move).
    pub residual_halo: usize,
}

impl FlowConfig {
    /// Defaults with the outermost ring of every clamped edge held fixed.
    pub fn new(model: EnergyModel, grid: &Grid) -> Self {
        FlowConfig {
            model,
            dt0: 1e-4,
            max_steps: 10_000,
            tol: 1e-6,
            dt_shrink: 0.5,
            dt_grow: 1.0,
            smooth_every: 0,
            smooth_strength: 0.5,
            record_every: 1,
            clamp_mask: edge_rings(grid, 1),
            residual_halo: 0,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), ConfigError> {
        let bad = |what: &str| Err(ConfigError::Flow(what.to_string()));
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return bad("dt0 must be positive");
        }
        if !(self.dt_shrink > 0.0 && self.dt_shrink < 1.0) {
            return bad("dt_shrink must lie in (0, 1)");
        }
        if !(self.dt_grow >= 1.0 && self.dt_grow.is_finite()) {
            return bad("dt_grow must be at least 1");
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad("tol must be positive");
        }
        if !(self.smooth_strength > 0.0 && self.smooth_strength <= 1.0) {
            return bad("smooth_strength must lie in (0, 1]");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if self.clamp_mask.len() != grid.len() {
            return Err(ConfigError::Flow(format!(
                "clamp mask has {} entries for {} nodes",
                self.clamp_mask.len(),
                grid.len()
            )));
        }
        Ok(())
    }
}

/// Mask of the `rings` outermost node rows along each clamped edge.
pub fn edge_rings(grid: &Grid, rings: usize) -> Vec<bool> {
    (0..grid.len())
        .map(|i| {
            let (i1, i2) = grid.coords(i);
            (0..2).any(|d| {
                grid.bc[d] == Boundary::Clamped && grid.edge_distance(d, [i1, i2][d]) < rings
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub emb: EmbeddingField,
    /// Accepted steps so far.
    pub step: usize,
    pub energy: f64,
    pub max_shape_residual: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub energy: f64,
    pub max_residual: f64,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct FlowReport {
    pub state: FlowState,
    pub trajectory: Vec<TrajectoryRecord>,
    pub converged: bool,
    /// Descent sign found by the probe.
    pub sigma: f64,
    pub rejected: usize,
    pub smoothings: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum FlowError {
    #[error("immersion lost after step {}: {source}", last.step)]
    ImmersionLost {
        last: Box<FlowState>,
        source: GeometryError,
    },
    #[error("step size fell below {DT_FLOOR:e} of dt0 at step {}", last.step)]
    Stagnation { last: Box<FlowState> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("initial geometry: {0}")]
    Initial(GeometryError),
}

impl FlowError {
    /// Last valid state, when the flow got that far.
    pub fn last_state(&self) -> Option<&FlowState> {
        match self {
            FlowError::ImmersionLost { last, .. } | FlowError::Stagnation { last } => Some(last),
            _ => None,
        }
    }
}

/// State plus the fields needed to take the next step.
struct Current {
    state: FlowState,
    eps: Vec<f64>,
    normals: Vec<Vec3>,
}

fn energy_of(model: &EnergyModel, emb: &EmbeddingField) -> Result<f64, GeometryError> {
    Ok(total_energy(model, &GeometryBundle::from_embedding(emb)?))
}

fn shape_residual(model: &EnergyModel, b: &GeometryBundle) -> Vec<f64> {
    residuals(b, &stress_from_conjugates(b, &conjugates(model, b))).shape
}

fn monitored(config: &FlowConfig, grid: &Grid) -> Vec<usize> {
    (0..grid.len())
        .filter(|&i| !config.clamp_mask[i] && grid.is_interior(i, config.residual_halo))
        .collect()
}

fn evaluate(
    config: &FlowConfig,
    emb: EmbeddingField,
    step: usize,
    dt: f64,
    energy: Option<f64>,
) -> Result<Current, GeometryError> {
    let b = GeometryBundle::from_embedding(&emb)?;
    let energy = energy.unwrap_or_else(|| total_energy(&config.model, &b));
    let eps = shape_residual(&config.model, &b);
    let (max_shape_residual, _, _) = norms(&eps, &monitored(config, &b.grid));
    Ok(Current {
        state: FlowState {
            emb,
            step,
            energy,
            max_shape_residual,
            dt,
        },
        eps,
        normals: b.n,
    })
}

/// `X - amount * eps * n` on free nodes.
fn displaced(emb: &EmbeddingField, eps: &[f64], normals: &[Vec3], mask: &[bool], amount: f64) -> EmbeddingField {
    let x = emb
        .x
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            if mask[i] {
                *x
            } else {
                x - normals[i] * (amount * eps[i])
            }
        })
        .collect();
    EmbeddingField {
        grid: emb.grid.clone(),
        x,
    }
}

/// Descent sign from a secant probe along `eps n`.
///
/// Returns `+1` when moving against `eps n` lowers the energy and `-1` when
/// moving with it does. An inconclusive probe (residual or energy difference
/// at roundoff) falls back to `+1`.
pub fn descent_sign(emb: &EmbeddingField, config: &FlowConfig) -> Result<f64, FlowError> {
    config.validate(&emb.grid)?;
    let cur = evaluate(config, emb.clone(), 0, config.dt0, None).map_err(FlowError::Initial)?;
    Ok(probe(config, &cur))
}

fn probe(config: &FlowConfig, cur: &Current) -> f64 {
    let free = monitored(config, &cur.state.emb.grid);
    let (eps_max, _, _) = norms(&cur.eps, &free);
    let spacing = cur.state.emb.grid.h[0].min(cur.state.emb.grid.h[1]);
    if eps_max == 0.0 || !eps_max.is_finite() {
        info!("descent probe inconclusive (max residual {eps_max:e}); using sigma = +1");
        return 1.0;
    }
    let delta = 1e-3 * spacing / eps_max;
    let e = |s: f64| {
        let moved = displaced(&cur.state.emb, &cur.eps, &cur.normals, &config.clamp_mask, s * delta);
        energy_of(&config.model, &moved)
    };
    match (e(1.0), e(-1.0)) {
        (Ok(down), Ok(up)) => {
            let scale = cur.state.energy.abs().max(f64::MIN_POSITIVE);
            if (down - up).abs() <= 1e-13 * scale {
                info!("descent probe inconclusive (E- = {down:e}, E+ = {up:e}); using sigma = +1");
                1.0
            } else {
                let sigma = if down < up { 1.0 } else { -1.0 };
                info!("descent probe: E(X - d eps n) = {down:e}, E(X + d eps n) = {up:e}, sigma = {sigma}");
                sigma
            }
        }
        _ => {
            info!("descent probe lost the immersion; using sigma = +1");
            1.0
        }
    }
}

/// One accepted step, retrying with smaller `dt` while the energy rises.
/// Returns the new state and the number of rejected trials.
fn advance(config: &FlowConfig, cur: &Current, sigma: f64, dt0: f64) -> Result<(Current, usize), FlowError> {
    let mut dt = cur.state.dt;
    let mut rejected = 0;
    loop {
        let trial = displaced(&cur.state.emb, &cur.eps, &cur.normals, &config.clamp_mask, sigma * dt);
        let b = GeometryBundle::from_embedding(&trial).map_err(|source| FlowError::ImmersionLost {
            last: Box::new(cur.state.clone()),
            source,
        })?;
        let energy = total_energy(&config.model, &b);
        if energy <= cur.state.energy {
            let next = evaluate(config, trial, cur.state.step + 1, dt * config.dt_grow, Some(energy))
                .map_err(|source| FlowError::ImmersionLost {
                    last: Box::new(cur.state.clone()),
                    source,
                })?;
            return Ok((next, rejected));
        }
        rejected += 1;
        dt *= config.dt_shrink;
        debug!("step {} rejected, dt -> {dt:e}", cur.state.step + 1);
        if dt < DT_FLOOR * dt0 {
            return Err(FlowError::Stagnation {
                last: Box::new(cur.state.clone()),
            });
        }
    }
}

/// Initial state for [`flow_step`].
pub fn initial_state(emb: &EmbeddingField, config: &FlowConfig) -> Result<FlowState, FlowError> {
    config.validate(&emb.grid)?;
    Ok(evaluate(config, emb.clone(), 0, config.dt0, None)
        .map_err(FlowError::Initial)?
        .state)
}

/// Takes one accepted step from `state` with descent sign `sigma`.
pub fn flow_step(state: &FlowState, config: &FlowConfig, sigma: f64) -> Result<FlowState, FlowError> {
    config.validate(&state.emb.grid)?;
    let cur = evaluate(config, state.emb.clone(), state.step, state.dt, Some(state.energy))
        .map_err(FlowError::Initial)?;
    Ok(advance(config, &cur, sigma, config.dt0)?.0.state)
}

/// Weight that rises smoothly from 0 on a clamped edge to 1 an eighth of the
/// way across, so the reparametrization stays smooth where nodes are pinned.
fn ramp(distance: usize, nodes: usize) -> f64 {
    let width = (nodes as f64 / 8.0).max(4.0);
    let x = (distance as f64 / width).min(1.0);
    x * x * x * (10.0 + x * (6.0 * x - 15.0))
}

/// Moves free nodes toward the average of their four neighbours along the
/// surface: the tangent part of the pull, bent by the local curvature so the
/// node stays on the surface to third order. Nodes on a clamped edge stay put.
pub fn tangential_smoothing(
    emb: &EmbeddingField,
    b: &GeometryBundle,
    mask: &[bool],
    strength: f64,
) -> EmbeddingField {
    let grid = &emb.grid;
    let x = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (i1, i2) = grid.coords(i);
            let taper: f64 = (0..2)
                .filter(|&d| grid.bc[d] == Boundary::Clamped)
                .map(|d| ramp(grid.edge_distance(d, [i1, i2][d]), grid.n[d]))
                .product();
            if mask[i] || taper == 0.0 {
                return emb.x[i];
            }
            let step = |j: usize, n: usize, s: isize| (j as isize + s).rem_euclid(n as isize) as usize;
            let avg = (emb.x[grid.index(step(i1, grid.n[0], 1), i2)]
                + emb.x[grid.index(step(i1, grid.n[0], -1), i2)]
                + emb.x[grid.index(i1, step(i2, grid.n[1], 1))]
                + emb.x[grid.index(i1, step(i2, grid.n[1], -1))])
                * 0.25;
            let d = avg - emb.x[i];
            let n = b.n[i];
            let t = (d - n * d.dot(&n)) * (strength * taper);
            // follow the osculating quadric: X(u + du) = X + e_a du^a - K_ab du^a du^b n / 2
            let e = &b.e[i];
            let du = b.g_inv[i] * Vec2::new(e[0].dot(&t), e[1].dot(&t));
            emb.x[i] + t - n * (0.5 * du.dot(&(b.k[i] * du)))
        })
        .collect();
    EmbeddingField {
        grid: grid.clone(),
        x,
    }
}

/// Runs the flow until the residual drops below `tol` or `max_steps` is hit.
pub fn run_flow(initial: &EmbeddingField, config: &FlowConfig) -> Result<FlowReport, FlowError> {
    config.validate(&initial.grid)?;
    let mut cur = evaluate(config, initial.clone(), 0, config.dt0, None).map_err(FlowError::Initial)?;
    let sigma = probe(config, &cur);
    let record = |s: &FlowState| TrajectoryRecord {
        step: s.step,
        energy: s.energy,
        max_residual: s.max_shape_residual,
        dt: s.dt,
    };
    let mut trajectory = vec![record(&cur.state)];
    let mut rejected = 0;
    let mut smoothings = 0;
    while cur.state.max_shape_residual > config.tol && cur.state.step < config.max_steps {
        let (next, r) = advance(config, &cur, sigma, config.dt0)?;
        rejected += r;
        cur = next;
        if config.smooth_every > 0 && cur.state.step % config.smooth_every == 0 {
            let b = GeometryBundle::from_embedding(&cur.state.emb).map_err(FlowError::Initial)?;
            let smoothed = tangential_smoothing(&cur.state.emb, &b, &config.clamp_mask, config.smooth_strength);
            if let Ok(energy) = energy_of(&config.model, &smoothed) {
                if energy <= cur.state.energy {
                    if let Ok(s) = evaluate(config, smoothed, cur.state.step, cur.state.dt, Some(energy)) {
                        cur = s;
                        smoothings += 1;
                    }
                }
            }
        }
        if cur.state.step % config.record_every == 0 {
            trajectory.push(record(&cur.state));
        }
    }
    if trajectory.last().map(|r| r.step) != Some(cur.state.step) {
        trajectory.push(record(&cur.state));
    }
    let converged = cur.state.max_shape_residual <= config.tol;
    info!(
        "flow finished after {} steps: energy {:e}, max residual {:e}, converged = {converged}",
        cur.state.step, cur.state.energy, cur.state.max_shape_residual
    );
    Ok(FlowReport {
        state: cur.state,
        trajectory,
        converged,
        sigma,
        rejected,
        smoothings,
    })
}

/// Neck radius `a = c cosh(L / (2c))` of the stable catenoid spanning two
/// coaxial rings of radius `a` a distance `L` apart, or `None` past the
/// existence limit.
pub fn catenoid_neck(a: f64, l: f64) -> Option<f64> {
    // f(c) = c cosh(L / 2c) - a has its minimum at c* with tanh(L / 2c*) = 2c*/L;
    // the stable branch is c > c*.
    let f = |c: f64| c * (l / (2.0 * c)).cosh() - a;
    let g = |c: f64| (l / (2.0 * c)).tanh() - 2.0 * c / l;
    let (mut lo, mut hi) = (1e-6 * l, l);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c_star = 0.5 * (lo + hi);
    if f(c_star) > 0.0 {
        return None;
    }
    let (mut lo, mut hi) = (c_star, a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Radius of the thinnest ring of a surface of revolution about the z axis,
/// taking the mean distance from the axis over each `u2 = const` ring.
pub fn neck_radius(emb: &EmbeddingField) -> f64 {
    let grid = &emb.grid;
    (0..grid.n[1])
        .map(|i2| {
            (0..grid.n[0])
                .map(|i1| {
                    let x = emb.x[grid.index(i1, i2)];
                    x.x.hypot(x.y)
                })
                .sum::<f64>()
                / grid.n[0] as f64
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SurfaceSpec;

    #[test]
    fn catenoid_root() {
        let c = catenoid_neck(1.0, 1.0).unwrap();
        assert!((c * (0.5 / c).cosh() - 1.0).abs() < 1e-12);
        assert!(c > 0.8 && c < 0.9, "c = {c}");
        assert!(catenoid_neck(1.0, 1.4).is_none());
    }

    #[test]
    fn neck_of_sampled_catenoid() {
        let spec = SurfaceSpec::Catenoid { neck: 0.7, half_length: 0.5 };
        let grid = spec.natural_grid(16, 17).unwrap();
        assert!((neck_radius(&spec.sample(&grid).unwrap()) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn edge_ring_mask() {
        let spec = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 };
        let grid = spec.natural_grid(8, 10).unwrap();
        let m = edge_rings(&grid, 2);
        assert_eq!(m.iter().filter(|&&b| b).count(), 8 * 4);
        assert!(m[grid.index(3, 1)] && m[grid.index(3, 8)] && !m[grid.index(3, 2)]);
    }

    #[test]
    fn config_validation() {
        let spec = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 };
        let grid = spec.natural_grid(8, 10).unwrap();
        let mut c = FlowConfig::new(EnergyModel::soap_film(1.0), &grid);
        assert!(c.validate(&grid).is_ok());
        c.dt_shrink = 1.0;
        assert!(c.validate(&grid).is_err());
        c.dt_shrink = 0.5;
        c.clamp_mask.pop();
        assert!(c.validate(&grid).is_err());
    }

    #[test]
    fn soap_film_on_cylinder_descends() {
        let spec = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 };
        let grid = spec.natural_grid(24, 17).unwrap();
        let emb = spec.sample(&grid).unwrap();
        let mut config = FlowConfig::new(EnergyModel::soap_film(1.0), &grid);
        config.max_steps = 20;
        config.dt0 = 1e-3;
        let report = run_flow(&emb, &config).unwrap();
        assert_eq!(report.sigma, 1.0);
        let e: Vec<f64> = report.trajectory.iter().map(|r| r.energy).collect();
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
        for i in 0..grid.len() {
            if config.clamp_mask[i] {
                assert_eq!(report.state.emb.x[i], emb.x[i]);
            }
        }
    }

    #[test]
    fn smoothing_is_tangential() {
        let spec = SurfaceSpec::Torus { major: 2.0, minor: 0.7 };
        let grid = spec.natural_grid(32, 32).unwrap();
        let emb = spec.sample(&grid).unwrap();
        let b = GeometryBundle::from_embedding(&emb).unwrap();
        let s = tangential_smoothing(&emb, &b, &vec![false; grid.len()], 0.5);
        let mut moved: f64 = 0.0;
        for (i, p) in s.x.iter().enumerate() {
            moved = moved.max((p - emb.x[i]).norm());
            // distance from the tube of radius 0.7 around the core circle
            let off = ((p.x.hypot(p.y) - 2.0).hypot(p.z) - 0.7).abs();
            assert!(off < 1e-6, "node {i} is {off:e} off the torus");
        }
        assert!(moved > 1e-3);
    }
}

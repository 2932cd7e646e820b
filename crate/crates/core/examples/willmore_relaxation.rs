//! Willmore flow of a slender torus. The bending energy, the integral of K^2,
//! falls toward the Clifford value 8 pi^2 as the aspect ratio relaxes toward
//! sqrt 2.

use std::f64::consts::PI;

use membrane_stress::prelude::*;

fn aspect(emb: &EmbeddingField) -> f64 {
    let rho: Vec<f64> = emb.x.iter().map(|p| p.x.hypot(p.y)).collect();
    let (lo, hi) = rho.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    (hi + lo) / (hi - lo)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SurfaceSpec::Torus { major: 2.0, minor: 0.8 };
    let grid = spec.natural_grid(32, 32)?;
    let emb = spec.sample(&grid)?;
    let mut config = FlowConfig::new(EnergyModel::willmore(1.0), &grid);
    config.dt0 = 2e-4;
    config.max_steps = 6000;
    config.tol = 1e-3;
    config.smooth_every = 20;
    println!("start: energy {:.5}, R/r {:.4}", total_energy(&config.model, &GeometryBundle::from_embedding(&emb)?), aspect(&emb));
    let report = match run_flow(&emb, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return Ok(());
        }
    };
    println!(
        "after {} steps: energy {:.5} (8 pi^2 = {:.5}), R/r {:.4}, {} rejected, {} smoothings",
        report.state.step,
        report.state.energy,
        8.0 * PI * PI,
        aspect(&report.state.emb),
        report.rejected,
        report.smoothings
    );
    Ok(())
}

//! Total energies of a spherical band against their closed forms.

use std::f64::consts::PI;

use membrane_stress::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let theta0: f64 = 0.4;
    let spec = SurfaceSpec::SphereBand { radius: 1.0, margin: theta0 };
    for n in [32, 64, 128] {
        let b = GeometryBundle::from_embedding(&spec.sample(&spec.natural_grid(n, n + 1)?)?)?;
        let area = total_energy(&EnergyModel::soap_film(1.0), &b);
        let willmore = total_energy(&EnergyModel::willmore(1.0), &b);
        println!(
            "{n:>4}: area {area:.10} (exact {:.10})  willmore {willmore:.10} (exact {:.10})",
            4.0 * PI * theta0.cos(),
            16.0 * PI * theta0.cos()
        );
    }
    Ok(())
}

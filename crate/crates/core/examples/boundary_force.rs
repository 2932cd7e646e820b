//! Force transmitted across coordinate circles of a soap-film catenoid. The
//! two rims of any band carry equal and opposite loads.

use membrane_stress::prelude::*;
use membrane_stress::stress::Param;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SurfaceSpec::Catenoid { neck: 1.0, half_length: 1.0 };
    let grid = spec.natural_grid(128, 129)?;
    let b = GeometryBundle::from_embedding(&spec.sample(&grid)?)?;
    let stress = stress_from_conjugates(&b, &conjugates(&EnergyModel::soap_film(1.0), &b));
    for index in [10, 40, 64, 100] {
        let f = boundary_force(&b, &stress, CurveSpec { fixed: Param::U2, index, side: Side::Lower })?;
        println!("circle {index:>3}: F = ({:+.2e}, {:+.2e}, {:+.9})", f.x, f.y, f.z);
    }
    println!("every circle carries 2 pi mu c = {:.9}", 2.0 * std::f64::consts::PI);
    Ok(())
}

//! Stress of a Helfrich membrane on a sphere, assembled both from the energy
//! conjugates and from the constraint multipliers.

use membrane_stress::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (alpha, mu) = (1.0, 0.5);
    let spec = SurfaceSpec::SphereBand { radius: 1.0, margin: 0.4 };
    let grid = spec.natural_grid(64, 65)?;
    let b = GeometryBundle::from_embedding(&spec.sample(&grid)?)?;
    let model = EnergyModel::helfrich(alpha, mu);

    let conj = conjugates(&model, &b);
    let from_conj = stress_from_conjugates(&b, &conj);
    let from_mult = stress_from_multipliers(&b, &multipliers(&b, &conj));
    println!("routes identical: {}", from_conj == from_mult);

    let node = grid.index(0, 32);
    println!("f^ab at the equator:\n{}", from_conj.f_tan[node]);

    // a sphere under pure bending is in equilibrium; the tension leaves 2 mu / R
    let res = residuals(&b, &from_conj);
    println!("shape residual {:.9} (2 mu = {})", res.shape[node], 2.0 * mu);
    let norms = res.norms(&b);
    println!("tangential identity max {:.2e}", norms.tangential_max);
    Ok(())
}

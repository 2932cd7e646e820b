//! Closed-form conjugates of a general polynomial density checked against
//! finite differences of the density itself.

use membrane_stress::energy::{conjugates_fd_oracle, Term};
use membrane_stress::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = EnergyModel::from_terms(vec![
        Term { c: 0.3, p: 0, q: 0 },
        Term { c: 1.0, p: 2, q: 0 },
        Term { c: -0.4, p: 1, q: 1 },
    ])?;
    let spec = SurfaceSpec::EllipsoidBand { a: 1.0, b: 1.3, c: 0.8, margin: 0.4 };
    let grid = spec.natural_grid(32, 33)?;
    let b = GeometryBundle::from_embedding(&spec.sample(&grid)?)?;
    let exact = conjugates(&model, &b);
    for (i1, i2) in [(3, 10), (17, 16), (29, 22)] {
        let i = grid.index(i1, i2);
        let fd = conjugates_fd_oracle(&model, &b, i, 1e-5);
        println!(
            "node ({i1:>2}, {i2:>2}): |dH| {:.2e} of {:.3}   |dT| {:.2e} of {:.3}",
            (fd.hab - exact.hab[i]).norm(),
            exact.hab[i].norm(),
            (fd.tab - exact.tab[i]).norm(),
            exact.tab[i].norm()
        );
    }
    Ok(())
}

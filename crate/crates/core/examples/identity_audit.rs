//! Audits the classical surface identities on a torus at two resolutions and
//! prints how fast each residual falls.

use membrane_stress::diffgeo::audit_identities;
use membrane_stress::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SurfaceSpec::Torus { major: 2.0, minor: 0.7 };
    let mut previous: Option<IdentityReport> = None;
    for n in [32, 64, 128] {
        let emb = spec.sample(&spec.natural_grid(n, n)?)?;
        let b = GeometryBundle::from_embedding(&emb)?;
        let report = audit_identities(&emb, &b);
        println!("{n}x{n}");
        for e in &report.entries {
            let ratio = previous
                .as_ref()
                .filter(|_| e.max_residual > 0.0)
                .map(|p| p.max_residual(&e.name) / e.max_residual)
                .map_or(String::new(), |r| format!("  ratio {r:6.2}"));
            println!("  {:<20} {:.3e}{ratio}", e.name, e.max_residual);
        }
        previous = Some(report);
    }
    Ok(())
}

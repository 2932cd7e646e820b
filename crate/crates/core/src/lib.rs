//! Curvature-elastic surfaces on structured charts.
//!
//! The crate samples analytic surfaces onto parameter grids, computes their
//! induced geometry with fourth-order finite differences, and evaluates
//! Hamiltonians built from the metric `g_ab` and extrinsic curvature `K_ab`.
//! From the Hamiltonian it assembles the conserved stress `f^a` in two
//! independent ways (directly from the conjugates `H^ab`, `T^ab`, and from the
//! Lagrange multipliers enforcing the geometric constraints), evaluates the
//! normal "shape" and tangential residuals of `nabla_a f^a = 0`, integrates
//! boundary forces, and relaxes surfaces toward equilibrium by gradient flow.
//!
//! Sign convention: `K_ab = e_a . d_b n`, so with the outward normal a sphere
//! of radius `R` has `K = 2 / R`.
//!
//! ```
//! use membrane_stress::prelude::*;
//!
//! let spec = SurfaceSpec::SphereBand { radius: 1.0, margin: 0.3 };
//! let grid = spec.natural_grid(64, 65).unwrap();
//! let bundle = GeometryBundle::from_embedding(&spec.sample(&grid).unwrap()).unwrap();
//! let model = EnergyModel::helfrich(1.0, 0.5);
//! let stress = stress_from_conjugates(&bundle, &conjugates(&model, &bundle));
//! let res = residuals(&bundle, &stress);
//! let mid = grid.index(0, 32);
//! assert!((res.shape[mid] - 1.0).abs() < 1e-4); // 2 mu
//! ```

pub mod chart;
pub mod cli;
pub mod diffgeo;
pub mod energy;
pub mod error;
pub mod flow;
pub mod io;
pub mod stress;

pub use nalgebra;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;

pub mod prelude {
    pub use crate::chart::{Boundary, Domain, EmbeddingField, Grid, SurfaceSpec};
    pub use crate::diffgeo::{audit_identities, GeometryBundle, IdentityReport, Orientation};
    pub use crate::energy::{
        conjugates, density, multipliers, total_energy, ConjugateFields, EnergyModel,
        MultiplierField,
    };
    pub use crate::error::{ConfigError, GeometryError};
    pub use crate::flow::{run_flow, FlowConfig, FlowError, FlowState};
    pub use crate::stress::{
        boundary_force, helfrich_shape_residual, residuals, stress_from_conjugates,
        stress_from_multipliers, CurveSpec, ResidualField, Side, StressField,
    };
    pub use crate::{Mat2, Vec2, Vec3};
}

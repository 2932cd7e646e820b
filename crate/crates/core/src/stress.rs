//! The conserved stress `f^a = f^ab e_b + f^a n`, its divergence residuals and
//! the force it transmits across coordinate circles.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::Boundary;
use crate::diffgeo::{
    contract, cov_div_sym2, cov_div_vector, div_world, laplace_beltrami, norms, GeometryBundle,
    DEFAULT_HALO,
};
use crate::energy::{ConjugateFields, MultiplierField};
use crate::error::ConfigError;
use crate::{Mat2, Vec2, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct StressField {
    /// Tangential components `f^ab`.
    pub f_tan: Vec<Mat2>,
    /// Normal components `f^a`.
    pub f_nor: Vec<Vec2>,
    /// World vectors `f^ab e_b + f^a n`, one per parameter direction.
    pub f_world: Vec<[Vec3; 2]>,
}

impl StressField {
    /// Assembles the world form from the components.
    pub fn assemble(b: &GeometryBundle, f_tan: Vec<Mat2>, f_nor: Vec<Vec2>) -> Self {
        let f_world = (0..b.len())
            .into_par_iter()
            .map(|i| {
                let e = &b.e[i];
                let t = &f_tan[i];
                [0, 1].map(|a| e[0] * t[(a, 0)] + e[1] * t[(a, 1)] + b.n[i] * f_nor[i][a])
            })
            .collect();
        StressField { f_tan, f_nor, f_world }
    }

    pub fn len(&self) -> usize {
        self.f_tan.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_tan.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ResidualField {
    /// `nabla_a f^a - K_ab f^ab`.
    pub shape: Vec<f64>,
    /// `nabla_a f^ab + K_a^b f^a`, free index up.
    pub tangential: Vec<Vec2>,
    /// `(1/sqrt g) d_a (sqrt g f^a)` on Cartesian components.
    pub direct_div: Vec<Vec3>,
}

/// Max and RMS norms of the residual fields over interior nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualNorms {
    pub shape_max: f64,
    pub shape_l2: f64,
    /// Norms of the tangential residual measured with `g_ab`.
    pub tangential_max: f64,
    pub tangential_l2: f64,
    pub direct_div_max: f64,
    pub direct_div_l2: f64,
    pub halo: usize,
    pub nodes: usize,
}

impl ResidualField {
    /// Magnitude of the tangential residual, `sqrt(t^a g_ab t^b)`.
    pub fn tangential_magnitude(&self, b: &GeometryBundle) -> Vec<f64> {
        self.tangential
            .iter()
            .zip(&b.g)
            .map(|(t, g)| t.dot(&(g * t)).max(0.0).sqrt())
            .collect()
    }

    pub fn norms(&self, b: &GeometryBundle) -> ResidualNorms {
        self.norms_with_halo(b, DEFAULT_HALO)
    }

    pub fn norms_with_halo(&self, b: &GeometryBundle, halo: usize) -> ResidualNorms {
        let nodes = b.grid.interior(halo);
        let (shape_max, _, shape_l2) = norms(&self.shape, &nodes);
        let (tangential_max, _, tangential_l2) = norms(&self.tangential_magnitude(b), &nodes);
        let direct: Vec<f64> = self.direct_div.iter().map(|v| v.norm()).collect();
        let (direct_div_max, _, direct_div_l2) = norms(&direct, &nodes);
        ResidualNorms {
            shape_max,
            shape_l2,
            tangential_max,
            tangential_l2,
            direct_div_max,
            direct_div_l2,
            halo,
            nodes: nodes.len(),
        }
    }
}

/// `f^ab = T^ab - H^ac K_c^b`, `f^a = -nabla_b H^ab`.
pub fn stress_from_conjugates(b: &GeometryBundle, conj: &ConjugateFields) -> StressField {
    let f_tan = (0..b.len())
        .into_par_iter()
        .map(|i| conj.tab[i] - conj.hab[i] * b.k_mixed(i))
        .collect();
    let f_nor = cov_div_sym2(b, &conj.hab).into_iter().map(|v| -v).collect();
    StressField::assemble(b, f_tan, f_nor)
}

/// `f^ab = Lambda^ac K_c^b + 2 lambda^ab`, `f^a = -lambda_perp^a`.
///
/// `lambda_n` is not an input to the stress.
pub fn stress_from_multipliers(b: &GeometryBundle, mult: &MultiplierField) -> StressField {
    let f_tan = (0..b.len())
        .into_par_iter()
        .map(|i| mult.lambda_g[i] * 2.0 + mult.lambda_k[i] * b.k_mixed(i))
        .collect();
    let f_nor = mult.lambda_perp.iter().map(|v| -v).collect();
    StressField::assemble(b, f_tan, f_nor)
}

/// Shape, tangential and direct divergence residuals of `nabla_a f^a = 0`.
pub fn residuals(b: &GeometryBundle, stress: &StressField) -> ResidualField {
    let div_nor = cov_div_vector(b, &stress.f_nor);
    let div_tan = cov_div_sym2(b, &stress.f_tan);
    let (shape, tangential) = (0..b.len())
        .into_par_iter()
        .map(|i| {
            let shape = div_nor[i] - contract(&b.k[i], &stress.f_tan[i]);
            let tangential = div_tan[i] + b.k_mixed(i).transpose() * stress.f_nor[i];
            (shape, tangential)
        })
        .unzip();
    ResidualField {
        shape,
        tangential,
        direct_div: div_world(b, &stress.f_world),
    }
}

/// Shape equation of `H = alpha K^2 + mu` written out directly:
/// `-2 alpha lap K - alpha K (2 I2 - K^2) + mu K`.
pub fn helfrich_shape_residual(b: &GeometryBundle, alpha: f64, mu: f64) -> Vec<f64> {
    let kt = b.trace_field();
    let lap = laplace_beltrami(b, &kt);
    (0..b.len())
        .map(|i| {
            let k = kt[i];
            -2.0 * alpha * lap[i] - alpha * k * (2.0 * b.k_squared(i) - k * k) + mu * k
        })
        .collect()
}

/// Parameter held constant along a coordinate curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    U1,
    U2,
}

impl Param {
    pub fn dir(self) -> usize {
        match self {
            Param::U1 => 0,
            Param::U2 => 1,
        }
    }
}

/// Region retained when cutting along a curve. The conormal points out of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Retained region has smaller values of the fixed parameter.
    Lower,
    /// Retained region has larger values of the fixed parameter.
    Upper,
}

/// Grid-aligned closed curve `u_fixed = const` through node `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSpec {
    pub fixed: Param,
    pub index: usize,
    pub side: Side,
}

/// `sum eta_a f^a ds` along a closed coordinate curve, with `eta` the outward
/// unit conormal of the retained side. The running direction must be periodic,
/// where the trapezoidal rule is the plain node sum.
pub fn boundary_force(
    b: &GeometryBundle,
    stress: &StressField,
    curve: CurveSpec,
) -> Result<Vec3, ConfigError> {
    let k = curve.fixed.dir();
    let r = 1 - k;
    let grid = &b.grid;
    if grid.bc[r] != Boundary::Periodic {
        return Err(ConfigError::OpenCurve { direction: r + 1 });
    }
    if curve.index >= grid.n[k] {
        return Err(ConfigError::CurveIndex {
            index: curve.index,
            len: grid.n[k],
        });
    }
    let s = match curve.side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    };
    let mut force = Vec3::zeros();
    for j in 0..grid.n[r] {
        let i = if k == 0 {
            grid.index(curve.index, j)
        } else {
            grid.index(j, curve.index)
        };
        let eta = s / b.g_inv[i][(k, k)].sqrt();
        let ds = b.g[i][(r, r)].sqrt() * grid.h[r];
        force += stress.f_world[i][k] * (eta * ds);
    }
    Ok(force)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SurfaceSpec;
    use crate::energy::{conjugates, multipliers, EnergyModel};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn bundle(spec: SurfaceSpec, n1: usize, n2: usize) -> GeometryBundle {
        let grid = spec.natural_grid(n1, n2).unwrap();
        GeometryBundle::from_embedding(&spec.sample(&grid).unwrap()).unwrap()
    }

    fn both(b: &GeometryBundle, model: &EnergyModel) -> (StressField, StressField) {
        let c = conjugates(model, b);
        let m = multipliers(b, &c);
        (stress_from_conjugates(b, &c), stress_from_multipliers(b, &m))
    }

    #[test]
    fn routes_agree_on_torus() {
        let b = bundle(SurfaceSpec::Torus { major: 2.0, minor: 0.6 }, 24, 24);
        let (a, m) = both(&b, &EnergyModel::helfrich(1.0, 0.3));
        assert_eq!(a, m);
    }

    #[test]
    fn lambda_n_fault_is_inert() {
        let b = bundle(SurfaceSpec::Catenoid { neck: 1.0, half_length: 1.0 }, 16, 17);
        let model = EnergyModel::helfrich(1.0, 0.4);
        let mut m = multipliers(&b, &conjugates(&model, &b));
        let clean = stress_from_multipliers(&b, &m);
        m.lambda_n.iter_mut().for_each(|x| *x = f64::NAN);
        assert_eq!(stress_from_multipliers(&b, &m), clean);
    }

    #[test]
    fn world_form_reconstructs() {
        let b = bundle(SurfaceSpec::Torus { major: 2.0, minor: 0.6 }, 16, 16);
        let (s, _) = both(&b, &EnergyModel::helfrich(0.5, 1.0));
        for i in 0..b.len() {
            for a in 0..2 {
                let expect = b.e[i][0] * s.f_tan[i][(a, 0)] + b.e[i][1] * s.f_tan[i][(a, 1)] + b.n[i] * s.f_nor[i][a];
                assert_eq!(s.f_world[i][a], expect);
            }
        }
    }

    #[test]
    fn sphere_shape_residual_is_two_mu() {
        let mu = 0.5;
        let b = bundle(SurfaceSpec::SphereBand { radius: 1.0, margin: 0.4 }, 64, 65);
        let (s, _) = both(&b, &EnergyModel::helfrich(1.0, mu));
        let r = residuals(&b, &s);
        let direct = helfrich_shape_residual(&b, 1.0, mu);
        for i in b.grid.interior(DEFAULT_HALO) {
            assert!((r.shape[i] - 2.0 * mu).abs() < 1e-3, "{}", r.shape[i]);
            assert!((direct[i] - 2.0 * mu).abs() < 1e-3);
        }
    }

    #[test]
    fn soap_film_has_no_normal_stress() {
        let b = bundle(SurfaceSpec::EllipsoidBand { a: 1.0, b: 1.3, c: 0.8, margin: 0.4 }, 24, 25);
        let (s, _) = both(&b, &EnergyModel::soap_film(2.0));
        assert!(s.f_nor.iter().all(|v| *v == Vec2::zeros()));
    }

    #[test]
    fn projections_of_direct_divergence() {
        let b = bundle(SurfaceSpec::Torus { major: 2.0, minor: 0.7 }, 64, 64);
        let (s, _) = both(&b, &EnergyModel::helfrich(1.0, 0.2));
        let r = residuals(&b, &s);
        for i in 0..b.len() {
            assert!((r.direct_div[i].dot(&b.n[i]) - r.shape[i]).abs() < 5e-4);
            let lowered = b.g[i] * r.tangential[i];
            for a in 0..2 {
                assert!((r.direct_div[i].dot(&b.e[i][a]) - lowered[a]).abs() < 5e-4);
            }
        }
    }

    #[test]
    fn cylinder_soap_film_force() {
        let (rho, mu) = (1.5, 0.8);
        let b = bundle(SurfaceSpec::Cylinder { radius: rho, length: 2.0 }, 128, 33);
        let (s, _) = both(&b, &EnergyModel::soap_film(mu));
        let lower = boundary_force(&b, &s, CurveSpec { fixed: Param::U2, index: 16, side: Side::Lower }).unwrap();
        assert_relative_eq!(lower, Vec3::new(0.0, 0.0, -2.0 * PI * rho * mu), epsilon = 1e-5);
        let upper = boundary_force(&b, &s, CurveSpec { fixed: Param::U2, index: 16, side: Side::Upper }).unwrap();
        assert_relative_eq!(upper, -lower, epsilon = 1e-12);
    }

    #[test]
    fn open_curve_is_rejected() {
        let b = bundle(SurfaceSpec::Cylinder { radius: 1.0, length: 2.0 }, 16, 16);
        let (s, _) = both(&b, &EnergyModel::soap_film(1.0));
        let err = boundary_force(&b, &s, CurveSpec { fixed: Param::U1, index: 3, side: Side::Lower });
        assert!(matches!(err, Err(ConfigError::OpenCurve { .. })));
    }
}

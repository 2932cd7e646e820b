//! Covariant derivatives of surface tensors built from the metric-compatible
//! connection.

use rayon::prelude::*;

use super::bundle::GeometryBundle;
use super::stencil::{partial, FieldValue};
use crate::{Mat2, Vec2, Vec3};

impl FieldValue for Vec2 {
    fn zero() -> Self {
        Vec2::zeros()
    }
}

/// `(1/sqrt g) d_a (sqrt g w_a)` for any per-node quantity carried by the two
/// directions.
fn density_divergence<T: FieldValue>(b: &GeometryBundle, w: [Vec<T>; 2]) -> Vec<T> {
    let grid = &b.grid;
    let [w1, w2] = w;
    let d1 = partial(grid, &w1, 0);
    let d2 = partial(grid, &w2, 1);
    d1.into_par_iter()
        .zip(d2)
        .zip(&b.sqrt_g)
        .map(|((a, c), &s)| (a + c) * (1.0 / s))
        .collect()
}

/// Covariant gradient of a scalar, `nabla_a phi = d_a phi` (lower index).
pub fn cov_grad_scalar(b: &GeometryBundle, phi: &[f64]) -> Vec<Vec2> {
    let d1 = partial(&b.grid, phi, 0);
    let d2 = partial(&b.grid, phi, 1);
    d1.into_iter().zip(d2).map(|(x, y)| Vec2::new(x, y)).collect()
}

/// Raises a covector field with `g^ab`.
pub fn raise(b: &GeometryBundle, w: &[Vec2]) -> Vec<Vec2> {
    w.iter().zip(&b.g_inv).map(|(v, gi)| gi * v).collect()
}

/// Lowers a vector field with `g_ab`.
pub fn lower(b: &GeometryBundle, v: &[Vec2]) -> Vec<Vec2> {
    v.iter().zip(&b.g).map(|(v, g)| g * v).collect()
}

/// `nabla_a v^a = (1/sqrt g) d_a (sqrt g v^a)`.
pub fn cov_div_vector(b: &GeometryBundle, v: &[Vec2]) -> Vec<f64> {
    let w1 = v.iter().zip(&b.sqrt_g).map(|(v, s)| s * v[0]).collect();
    let w2 = v.iter().zip(&b.sqrt_g).map(|(v, s)| s * v[1]).collect();
    density_divergence(b, [w1, w2])
}

/// `nabla_a t^ab` of a contravariant 2-tensor, returned with the free index up:
/// `d_a t^ab + Gamma^a_ac t^cb + Gamma^b_ac t^ac`.
///
/// Only `t` is differentiated, so a bundle with analytic connection
/// reproduces analytic divergences of tensors built from `g^ab` and `K_ab`.
pub fn cov_div_sym2(b: &GeometryBundle, t: &[Mat2]) -> Vec<Vec2> {
    let grid = &b.grid;
    let d1 = partial(grid, t, 0);
    let d2 = partial(grid, t, 1);
    (0..b.len())
        .into_par_iter()
        .map(|i| {
            let gam = &b.gamma[i];
            let t = &t[i];
            let mut v = Vec2::new(d1[i][(0, 0)] + d2[i][(1, 0)], d1[i][(0, 1)] + d2[i][(1, 1)]);
            // Gamma^a_ac summed over a
            let trace = Vec2::new(
                gam[0][(0, 0)] + gam[1][(1, 0)],
                gam[0][(0, 1)] + gam[1][(1, 1)],
            );
            for c in 0..2 {
                v[c] += trace[0] * t[(0, c)] + trace[1] * t[(1, c)];
                v[c] += gam[c].component_mul(t).sum();
            }
            v
        })
        .collect()
}

/// Laplace-Beltrami operator `(1/sqrt g) d_a (sqrt g g^ab d_b phi)`.
pub fn laplace_beltrami(b: &GeometryBundle, phi: &[f64]) -> Vec<f64> {
    let grad = raise(b, &cov_grad_scalar(b, phi));
    cov_div_vector(b, &grad)
}

/// Divergence of a pair of world vectors `F^a`, taken component-wise on the
/// Cartesian components: `(1/sqrt g) d_a (sqrt g F^a)`.
pub fn div_world(b: &GeometryBundle, f: &[[Vec3; 2]]) -> Vec<Vec3> {
    let w1 = f.iter().zip(&b.sqrt_g).map(|(f, s)| f[0] * *s).collect();
    let w2 = f.iter().zip(&b.sqrt_g).map(|(f, s)| f[1] * *s).collect();
    density_divergence(b, [w1, w2])
}

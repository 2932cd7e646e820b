use rayon::prelude::*;

use super::stencil::gradient;
use crate::chart::{EmbeddingField, Frame, Grid};
use crate::error::GeometryError;
use crate::{Mat2, Vec2, Vec3};

/// Relative threshold on `sqrt(det g)` below which a node is degenerate.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Normal orientation relative to the chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `n = e_1 x e_2 / |e_1 x e_2|`.
    #[default]
    Chart,
    /// `n = e_2 x e_1 / |e_2 x e_1|`.
    Reversed,
}

/// Induced geometry at every node.
///
/// Curvature follows `K_ab = e_a . d_b n`. With the outward normal the unit
/// sphere has `K_ab = g_ab` and `K = g^ab K_ab = +2`; a lot of membrane
/// literature uses the opposite sign.
#[derive(Debug, Clone)]
pub struct GeometryBundle {
    pub grid: Grid,
    /// Tangents `e_a = d_a X`.
    pub e: Vec<[Vec3; 2]>,
    pub n: Vec<Vec3>,
    pub g: Vec<Mat2>,
    pub g_inv: Vec<Mat2>,
    pub sqrt_g: Vec<f64>,
    /// Symmetrized extrinsic curvature.
    pub k: Vec<Mat2>,
    /// `|K_12 - K_21| / 2` of the raw `e_a . d_b n` before symmetrization.
    pub k_asym: Vec<f64>,
    /// `gamma[c][(a, b)] = Gamma^c_ab`.
    pub gamma: Vec<[Mat2; 2]>,
}

impl GeometryBundle {
    /// Finite-difference geometry of a sampled embedding.
    pub fn from_embedding(emb: &EmbeddingField) -> Result<Self, GeometryError> {
        Self::with_orientation(emb, Orientation::Chart)
    }

    pub fn with_orientation(
        emb: &EmbeddingField,
        orientation: Orientation,
    ) -> Result<Self, GeometryError> {
        let grid = &emb.grid;
        let [d1, d2] = gradient(grid, &emb.x);
        let e: Vec<[Vec3; 2]> = d1.into_iter().zip(d2).map(|(a, b)| [a, b]).collect();
        let g: Vec<Mat2> = e.par_iter().map(metric).collect();
        let sqrt_g: Vec<f64> = g.iter().map(|m| m.determinant().max(0.0).sqrt()).collect();
        check_immersion(grid, &sqrt_g)?;

        let n: Vec<Vec3> = e
            .par_iter()
            .map(|[e1, e2]| match orientation {
                Orientation::Chart => e1.cross(e2).normalize(),
                Orientation::Reversed => e2.cross(e1).normalize(),
            })
            .collect();
        let dn = gradient(grid, &n);
        let (k, k_asym): (Vec<Mat2>, Vec<f64>) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let [e1, e2] = e[i];
                let raw = Mat2::new(
                    e1.dot(&dn[0][i]),
                    e1.dot(&dn[1][i]),
                    e2.dot(&dn[0][i]),
                    e2.dot(&dn[1][i]),
                );
                let sym = (raw + raw.transpose()) * 0.5;
                (sym, 0.5 * (raw[(0, 1)] - raw[(1, 0)]).abs())
            })
            .unzip();

        let g_inv: Vec<Mat2> = g.iter().map(inverse).collect();
        let dg = gradient(grid, &g);
        let gamma = (0..grid.len())
            .into_par_iter()
            .map(|i| christoffel(&g_inv[i], [&dg[0][i], &dg[1][i]]))
            .collect();

        Ok(GeometryBundle {
            grid: grid.clone(),
            e,
            n,
            g,
            g_inv,
            sqrt_g,
            k,
            k_asym,
            gamma,
        })
    }

    /// Geometry assembled from analytic frames: tangents, normal, curvature
    /// and Christoffel symbols are exact, no differentiation is performed.
    pub fn from_frames(grid: &Grid, frames: &[Frame]) -> Result<Self, GeometryError> {
        assert_eq!(frames.len(), grid.len(), "one frame per node");
        let e: Vec<[Vec3; 2]> = frames.iter().map(|f| f.e).collect();
        let g: Vec<Mat2> = frames.iter().map(Frame::metric).collect();
        let sqrt_g: Vec<f64> = g.iter().map(|m| m.determinant().max(0.0).sqrt()).collect();
        check_immersion(grid, &sqrt_g)?;
        let g_inv: Vec<Mat2> = g.iter().map(inverse).collect();
        let gamma = frames
            .iter()
            .zip(&g_inv)
            .map(|(f, gi)| {
                let mut out = [Mat2::zeros(); 2];
                for (c, gc) in out.iter_mut().enumerate() {
                    for a in 0..2 {
                        for b in 0..2 {
                            gc[(a, b)] = (0..2).map(|d| gi[(c, d)] * f.e[d].dot(&f.xx[a][b])).sum();
                        }
                    }
                }
                out
            })
            .collect();
        Ok(GeometryBundle {
            grid: grid.clone(),
            e,
            n: frames.iter().map(Frame::normal).collect(),
            g,
            g_inv,
            sqrt_g,
            k: frames.iter().map(Frame::curvature).collect(),
            k_asym: vec![0.0; grid.len()],
            gamma,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Mixed curvature `K_a^b = K_ac g^cb`, stored as `(a, b)`.
    #[inline]
    pub fn k_mixed(&self, i: usize) -> Mat2 {
        self.k[i] * self.g_inv[i]
    }

    /// Contravariant curvature `K^ab`.
    #[inline]
    pub fn k_upper(&self, i: usize) -> Mat2 {
        self.g_inv[i] * self.k[i] * self.g_inv[i]
    }

    /// Trace `K = g^ab K_ab`.
    #[inline]
    pub fn mean_trace(&self, i: usize) -> f64 {
        contract(&self.g_inv[i], &self.k[i])
    }

    /// Trace field `K` over all nodes.
    pub fn trace_field(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.mean_trace(i)).collect()
    }

    /// `K_ab K^ab`.
    #[inline]
    pub fn k_squared(&self, i: usize) -> f64 {
        contract(&self.k[i], &self.k_upper(i))
    }

    /// Gaussian curvature `det K_ab / det g_ab`.
    #[inline]
    pub fn gaussian_curvature(&self, i: usize) -> f64 {
        self.k[i].determinant() / self.g[i].determinant()
    }

    /// Area element weights `sqrt(g) w` for quadrature.
    pub fn area_weights(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.sqrt_g[i] * self.grid.weight(i)).collect()
    }

    /// Surface vector `v^a` to world vector `v^a e_a`.
    #[inline]
    pub fn push_forward(&self, i: usize, v: &Vec2) -> Vec3 {
        self.e[i][0] * v[0] + self.e[i][1] * v[1]
    }

    /// Largest raw asymmetry of `e_a . d_b n`.
    pub fn max_asymmetry(&self) -> f64 {
        self.k_asym.iter().copied().fold(0.0, f64::max)
    }
}

/// Full contraction `sum_ab A_ab B_ab`.
#[inline]
pub fn contract(a: &Mat2, b: &Mat2) -> f64 {
    a.component_mul(b).sum()
}

#[inline]
pub(crate) fn metric(e: &[Vec3; 2]) -> Mat2 {
    let g12 = e[0].dot(&e[1]);
    Mat2::new(e[0].dot(&e[0]), g12, g12, e[1].dot(&e[1]))
}

#[inline]
pub(crate) fn inverse(g: &Mat2) -> Mat2 {
    let det = g.determinant();
    Mat2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det
}

/// `Gamma^c_ab = 1/2 g^cd (d_a g_db + d_b g_da - d_d g_ab)`.
pub(crate) fn christoffel(g_inv: &Mat2, dg: [&Mat2; 2]) -> [Mat2; 2] {
    // lowered symbols Gamma_dab
    let mut lower = [Mat2::zeros(); 2];
    for (d, ld) in lower.iter_mut().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                ld[(a, b)] = 0.5 * (dg[a][(d, b)] + dg[b][(d, a)] - dg[d][(a, b)]);
            }
        }
    }
    let mut out = [Mat2::zeros(); 2];
    for (c, oc) in out.iter_mut().enumerate() {
        *oc = lower[0] * g_inv[(c, 0)] + lower[1] * g_inv[(c, 1)];
    }
    out
}

fn check_immersion(grid: &Grid, sqrt_g: &[f64]) -> Result<(), GeometryError> {
    let mut sorted: Vec<f64> = sqrt_g.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let threshold = DEGENERACY_RATIO * median;
    let (worst, &min) = sqrt_g
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if min.is_nan() || min <= threshold {
        return Err(GeometryError::Degenerate {
            node: grid.coords(worst),
            sqrt_g: min,
            threshold,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SurfaceSpec;
    use approx::assert_relative_eq;

    fn bundle(spec: SurfaceSpec, n1: usize, n2: usize) -> GeometryBundle {
        let grid = spec.natural_grid(n1, n2).unwrap();
        GeometryBundle::from_embedding(&spec.sample(&grid).unwrap()).unwrap()
    }

    #[test]
    fn unit_sphere_curvature_equals_metric() {
        let b = bundle(SurfaceSpec::SphereBand { radius: 1.0, margin: 0.4 }, 64, 65);
        for i in b.grid.interior(4) {
            assert!((b.k[i] - b.g[i]).abs().max() < 1e-6);
            assert!((b.mean_trace(i) - 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cylinder_has_one_principal_curvature() {
        let rho = 1.7;
        let b = bundle(SurfaceSpec::Cylinder { radius: rho, length: 2.0 }, 64, 33);
        for i in 0..b.len() {
            assert_relative_eq!(b.mean_trace(i), 1.0 / rho, max_relative = 1e-10);
            assert!(b.gaussian_curvature(i).abs() < 1e-12);
        }
    }

    #[test]
    fn catenoid_is_minimal() {
        let b = bundle(SurfaceSpec::Catenoid { neck: 1.0, half_length: 1.0 }, 64, 65);
        for i in b.grid.interior(4) {
            assert!(b.mean_trace(i).abs() < 1e-5, "K = {}", b.mean_trace(i));
        }
    }

    #[test]
    fn flipping_orientation_negates_curvature() {
        let spec = SurfaceSpec::Torus { major: 2.0, minor: 0.8 };
        let emb = spec.sample(&spec.natural_grid(32, 32).unwrap()).unwrap();
        let a = GeometryBundle::from_embedding(&emb).unwrap();
        let b = GeometryBundle::with_orientation(&emb, Orientation::Reversed).unwrap();
        for i in 0..a.len() {
            assert_eq!(a.g[i], b.g[i]);
            assert!((a.k[i] + b.k[i]).abs().max() < 1e-13);
        }
    }

    #[test]
    fn metric_inverse_is_exact() {
        let b = bundle(SurfaceSpec::EllipsoidBand { a: 1.0, b: 1.4, c: 0.7, margin: 0.3 }, 32, 33);
        for i in 0..b.len() {
            let id = b.g[i] * b.g_inv[i];
            assert!((id - Mat2::identity()).abs().max() < 1e-13);
            assert!((b.gamma[i][0] - b.gamma[i][0].transpose()).abs().max() < 1e-13);
            assert!((b.gamma[i][1] - b.gamma[i][1].transpose()).abs().max() < 1e-13);
        }
    }

    #[test]
    fn finite_difference_bundle_matches_analytic_frames() {
        let spec = SurfaceSpec::Torus { major: 2f64.sqrt(), minor: 1.0 };
        let grid = spec.natural_grid(64, 64).unwrap();
        let fd = GeometryBundle::from_embedding(&spec.sample(&grid).unwrap()).unwrap();
        let exact = GeometryBundle::from_frames(&grid, &spec.frames(&grid)).unwrap();
        for i in 0..grid.len() {
            assert!((fd.n[i] - exact.n[i]).norm() < 1e-12);
            assert!((fd.mean_trace(i) - exact.mean_trace(i)).abs() < 1e-12);
            for c in 0..2 {
                assert!((fd.gamma[i][c] - exact.gamma[i][c]).abs().max() < 1e-4);
            }
        }
    }

    #[test]
    fn collapsed_embedding_is_not_an_immersion() {
        let spec = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 };
        let mut emb = spec.sample(&spec.natural_grid(16, 16).unwrap()).unwrap();
        for p in emb.x.iter_mut() {
            p.x = 0.0;
            p.y = 0.0;
        }
        let err = GeometryBundle::from_embedding(&emb).unwrap_err();
        assert!(matches!(err, GeometryError::Degenerate { .. }));
    }
}

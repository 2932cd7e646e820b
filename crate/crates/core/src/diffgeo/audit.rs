//! Residuals of the structural identities tying `X`, `e_a`, `n`, `g_ab` and
//! `K_ab` together.
//!
//! Every identity is evaluated node-wise and summarized by its max norm and
//! RMS over the interior nodes (those at least `halo` nodes away from clamped
//! edges). The Riemann tensor is built intrinsically from the Christoffel
//! symbols and their derivatives; it never goes through `K_ab`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::{contract, GeometryBundle};
use super::stencil::{gradient, partial};
use crate::chart::EmbeddingField;
use crate::Mat2;

/// Nodes excluded next to clamped edges. Nested one-sided stencils degrade the
/// order within `2 * STENCIL_RADIUS` nodes per level of differentiation, and
/// the deepest quantities in the crate are four levels deep.
pub const DEFAULT_HALO: usize = 8;

/// Identity names in report order.
pub const IDENTITIES: [&str; 9] = [
    "tangent_constraint",
    "weingarten",
    "gauss",
    "gauss_codazzi",
    "codazzi_mainardi",
    "orthogonality",
    "normalization",
    "sigma_model",
    "curvature_symmetry",
];

/// Summary of one identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    pub max_residual: f64,
    pub l2_residual: f64,
    pub h1: f64,
    pub h2: f64,
    /// `(i1, i2)` of the largest residual.
    pub worst_node: [usize; 2],
}

/// Residual norms of every identity; serializes as a JSON array of entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdentityReport {
    pub entries: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn get(&self, name: &str) -> Option<&IdentityResidual> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn max_residual(&self, name: &str) -> f64 {
        self.get(name).map(|e| e.max_residual).unwrap_or(f64::NAN)
    }

    /// Largest max-norm across all identities.
    pub fn worst(&self) -> f64 {
        self.entries.iter().map(|e| e.max_residual).fold(0.0, f64::max)
    }

    /// True if every identity's max residual is at or below `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| e.max_residual <= tol)
    }
}

/// Node-wise residual magnitudes, one field per identity in [`IDENTITIES`] order.
pub fn identity_fields(emb: &EmbeddingField, b: &GeometryBundle) -> Vec<Vec<f64>> {
    let grid = &b.grid;
    let len = grid.len();
    let dx = gradient(grid, &emb.x);
    let dn = gradient(grid, &b.n);
    let e1: Vec<_> = b.e.iter().map(|e| e[0]).collect();
    let e2: Vec<_> = b.e.iter().map(|e| e[1]).collect();
    // de[a][b] = d_a e_b
    let de = [
        [partial(grid, &e1, 0), partial(grid, &e2, 0)],
        [partial(grid, &e1, 1), partial(grid, &e2, 1)],
    ];
    let gam: [Vec<Mat2>; 2] = [
        b.gamma.iter().map(|g| g[0]).collect(),
        b.gamma.iter().map(|g| g[1]).collect(),
    ];
    // dgam[c][a] = d_c Gamma^a
    let dgam = [gradient(grid, &gam[0]), gradient(grid, &gam[1])];
    let dgam = [[&dgam[0][0], &dgam[1][0]], [&dgam[0][1], &dgam[1][1]]];
    let dk = gradient(grid, &b.k);

    let rows: Vec<[f64; 9]> = (0..len)
        .into_par_iter()
        .map(|i| {
            let e = &b.e[i];
            let n = b.n[i];
            let gi = &b.g_inv[i];
            let k = &b.k[i];
            let km = b.k_mixed(i);
            let gm = &b.gamma[i];

            let tangent = ((e[0] - dx[0][i]).norm_squared() + (e[1] - dx[1][i]).norm_squared()).sqrt();

            let mut weingarten = 0.0;
            for a in 0..2 {
                let r = dn[a][i] - (e[0] * km[(a, 0)] + e[1] * km[(a, 1)]);
                weingarten += r.norm_squared();
            }

            let mut gauss = 0.0;
            for a in 0..2 {
                for c in 0..2 {
                    let r = de[a][c][i] - (e[0] * gm[0][(a, c)] + e[1] * gm[1][(a, c)])
                        + n * k[(a, c)];
                    gauss += r.norm_squared();
                }
            }

            // R^a_{212} in 1-based indices, i.e. (b, c, d) = (1, 0, 1) here
            let riemann_up = |a: usize| -> f64 {
                let (bb, c, d) = (1, 0, 1);
                let mut r = dgam[c][a][i][(d, bb)] - dgam[d][a][i][(c, bb)];
                for ee in 0..2 {
                    r += gm[a][(c, ee)] * gm[ee][(d, bb)] - gm[a][(d, ee)] * gm[ee][(c, bb)];
                }
                r
            };
            let r1212 = b.g[i][(0, 0)] * riemann_up(0) + b.g[i][(0, 1)] * riemann_up(1);
            let gauss_codazzi = (r1212 - k.determinant()).abs();

            // nabla_a K_bc - nabla_b K_ac for (a, b) = (0, 1)
            let cov_dk = |a: usize, bb: usize, c: usize| -> f64 {
                let mut v = dk[a][i][(bb, c)];
                for d in 0..2 {
                    v -= gm[d][(a, bb)] * k[(d, c)] + gm[d][(a, c)] * k[(bb, d)];
                }
                v
            };
            let codazzi = (0..2)
                .map(|c| (cov_dk(0, 1, c) - cov_dk(1, 0, c)).powi(2))
                .sum::<f64>()
                .sqrt();

            let orthogonality = (e[0].dot(&n).powi(2) + e[1].dot(&n).powi(2)).sqrt();
            let normalization = (n.norm_squared() - 1.0).abs();

            let mut dn_sq = 0.0;
            for a in 0..2 {
                for c in 0..2 {
                    dn_sq += gi[(a, c)] * dn[a][i].dot(&dn[c][i]);
                }
            }
            let sigma = (dn_sq - contract(k, &b.k_upper(i))).abs();

            [
                tangent,
                weingarten.sqrt(),
                gauss.sqrt(),
                gauss_codazzi,
                codazzi,
                orthogonality,
                normalization,
                sigma,
                b.k_asym[i],
            ]
        })
        .collect();

    (0..IDENTITIES.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect()
}

/// Audits all identities over nodes at least [`DEFAULT_HALO`] from clamped edges.
pub fn audit_identities(emb: &EmbeddingField, b: &GeometryBundle) -> IdentityReport {
    audit_identities_with_halo(emb, b, DEFAULT_HALO)
}

pub fn audit_identities_with_halo(
    emb: &EmbeddingField,
    b: &GeometryBundle,
    halo: usize,
) -> IdentityReport {
    let fields = identity_fields(emb, b);
    let interior = b.grid.interior(halo);
    let entries = IDENTITIES
        .iter()
        .zip(fields)
        .map(|(name, field)| {
            let (max, worst, l2) = norms(&field, &interior);
            let (w1, w2) = b.grid.coords(worst);
            IdentityResidual {
                name: name.to_string(),
                max_residual: max,
                l2_residual: l2,
                h1: b.grid.h[0],
                h2: b.grid.h[1],
                worst_node: [w1, w2],
            }
        })
        .collect();
    IdentityReport { entries }
}

/// Max norm, its node and RMS of `field` over `nodes`.
pub(crate) fn norms(field: &[f64], nodes: &[usize]) -> (f64, usize, f64) {
    let mut max = 0.0;
    let mut worst = nodes.first().copied().unwrap_or(0);
    let mut sq = 0.0;
    for &i in nodes {
        let v = field[i].abs();
        if v > max || v.is_nan() {
            max = v;
            worst = i;
        }
        sq += v * v;
    }
    let l2 = if nodes.is_empty() {
        0.0
    } else {
        (sq / nodes.len() as f64).sqrt()
    };
    (max, worst, l2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::SurfaceSpec;
    use crate::Vec3;

    fn report(spec: SurfaceSpec, n1: usize, n2: usize) -> IdentityReport {
        let grid = spec.natural_grid(n1, n2).unwrap();
        let emb = spec.sample(&grid).unwrap();
        let b = GeometryBundle::from_embedding(&emb).unwrap();
        audit_identities(&emb, &b)
    }

    #[test]
    fn flat_plane_is_exact() {
        let r = report(SurfaceSpec::Graph { amplitude: 0.0, width: 1.0, extent: 1.0 }, 24, 24);
        for e in &r.entries {
            assert!(e.max_residual < 1e-13, "{} = {}", e.name, e.max_residual);
        }
    }

    #[test]
    fn sphere_gaussian_curvature_is_one() {
        let spec = SurfaceSpec::SphereBand { radius: 1.0, margin: 0.4 };
        let r = report(spec, 128, 129);
        assert!(r.max_residual("gauss_codazzi") < 1e-5);
        // and the intrinsic route alone gives R_1212 / det g = 1
        let grid = spec.natural_grid(128, 129).unwrap();
        let emb = spec.sample(&grid).unwrap();
        let b = GeometryBundle::from_embedding(&emb).unwrap();
        let fields = identity_fields(&emb, &b);
        let gc = &fields[3];
        for i in grid.interior(DEFAULT_HALO) {
            assert!(gc[i] / b.g[i].determinant() < 5e-5);
        }
    }

    #[test]
    fn torus_identities_small() {
        // Gauss-Codazzi is the largest, about 1.4e-5 at 128^2
        let r = report(SurfaceSpec::Torus { major: 2f64.sqrt(), minor: 1.0 }, 128, 128);
        for e in &r.entries {
            assert!(e.max_residual <= 2e-5, "{} = {}", e.name, e.max_residual);
        }
    }

    #[test]
    fn displaced_node_spikes_weingarten_residual() {
        let spec = SurfaceSpec::Torus { major: 2f64.sqrt(), minor: 1.0 };
        let grid = spec.natural_grid(64, 64).unwrap();
        let mut emb = spec.sample(&grid).unwrap();
        let target = grid.index(20, 30);
        emb.x[target] += Vec3::new(0.1, 0.0, 0.0);
        let b = GeometryBundle::from_embedding(&emb).unwrap();
        let r = audit_identities(&emb, &b);
        let w = r.get("weingarten").unwrap();
        assert!(w.max_residual > 1e-2);
        assert!((w.worst_node[0] as isize - 20).abs() <= 4);
        assert!((w.worst_node[1] as isize - 30).abs() <= 4);
    }

    #[test]
    fn report_serializes_one_entry_per_identity() {
        let r = report(SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 }, 16, 24);
        let v = serde_json::to_value(&r).unwrap();
        let arr = v.as_array().unwrap();
        assert_eq!(arr.len(), IDENTITIES.len());
        for key in ["name", "max_residual", "l2_residual", "h1", "h2"] {
            assert!(arr[0].get(key).is_some(), "missing {key}");
        }
    }
}

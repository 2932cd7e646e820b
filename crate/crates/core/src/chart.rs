//! Parameter-domain grids and the catalog of analytic test surfaces.
//!
//! Nodes are stored row-major in `(i1, i2)`: the flat index of node `(i1, i2)`
//! is `i1 * n2 + i2`, so `i2` varies fastest. Every field in the crate uses
//! this ordering, and so do the CSV and OBJ exports.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::{Mat2, Vec3};

/// Minimum node count per direction.
pub const MIN_NODES: usize = 8;

/// End weights of the fourth-order Gregory rule, exact on cubics.
const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

/// Half-width of the widest finite-difference stencil.
pub const STENCIL_RADIUS: usize = 2;

/// Boundary condition along one parameter direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The direction wraps around; the seam node is not duplicated.
    Periodic,
    /// The direction has two edges carrying nodes.
    Clamped,
}

/// Parameter rectangle `[u1_min, u1_max] x [u2_min, u2_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u1: [f64; 2],
    pub u2: [f64; 2],
}

impl Domain {
    pub fn new(u1: [f64; 2], u2: [f64; 2]) -> Self {
        Domain { u1, u2 }
    }

    fn extent(&self, dir: usize) -> [f64; 2] {
        if dir == 0 {
            self.u1
        } else {
            self.u2
        }
    }
}

/// A structured grid over a parameter rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: [usize; 2],
    pub h: [f64; 2],
    pub bc: [Boundary; 2],
    pub domain: Domain,
}

impl Grid {
    /// Builds a grid. Periodic directions have spacing `L / n`, clamped ones
    /// `L / (n - 1)`.
    pub fn new(
        domain: Domain,
        n1: usize,
        n2: usize,
        bc1: Boundary,
        bc2: Boundary,
    ) -> Result<Self, ConfigError> {
        let n = [n1, n2];
        let bc = [bc1, bc2];
        let mut h = [0.0; 2];
        for dir in 0..2 {
            if n[dir] < MIN_NODES {
                return Err(ConfigError::TooFewNodes {
                    direction: dir + 1,
                    got: n[dir],
                    min: MIN_NODES,
                });
            }
            let [lo, hi] = domain.extent(dir);
            let len = hi - lo;
            if !(len.is_finite() && len > 0.0) {
                return Err(ConfigError::DegenerateDomain {
                    direction: dir + 1,
                    lo,
                    hi,
                });
            }
            h[dir] = match bc[dir] {
                Boundary::Periodic => len / n[dir] as f64,
                Boundary::Clamped => len / (n[dir] - 1) as f64,
            };
        }
        Ok(Grid { n, h, bc, domain })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.n[1] + i2
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.n[1], idx % self.n[1])
    }

    /// Parameter value of node `i` along direction `dir`.
    #[inline]
    pub fn param(&self, dir: usize, i: usize) -> f64 {
        self.domain.extent(dir)[0] + i as f64 * self.h[dir]
    }

    #[inline]
    pub fn params(&self, idx: usize) -> (f64, f64) {
        let (i1, i2) = self.coords(idx);
        (self.param(0, i1), self.param(1, i2))
    }

    /// Distance in nodes from the nearest clamped edge along `dir`;
    /// `usize::MAX` for periodic directions.
    #[inline]
    pub fn edge_distance(&self, dir: usize, i: usize) -> usize {
        match self.bc[dir] {
            Boundary::Periodic => usize::MAX,
            Boundary::Clamped => i.min(self.n[dir] - 1 - i),
        }
    }

    /// True if node `idx` is at least `halo` nodes away from every clamped edge.
    #[inline]
    pub fn is_interior(&self, idx: usize, halo: usize) -> bool {
        let (i1, i2) = self.coords(idx);
        self.edge_distance(0, i1) >= halo && self.edge_distance(1, i2) >= halo
    }

    /// Indices of nodes at least `halo` away from clamped edges.
    pub fn interior(&self, halo: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i, halo)).collect()
    }

    /// Quadrature weight of a node: `h1 * h2`, with Gregory end corrections
    /// on clamped edges so the rule is fourth order like the stencils.
    pub fn weight(&self, idx: usize) -> f64 {
        let (i1, i2) = self.coords(idx);
        let mut w = self.h[0] * self.h[1];
        for (dir, i) in [(0, i1), (1, i2)] {
            if self.bc[dir] == Boundary::Clamped {
                w *= GREGORY.get(self.edge_distance(dir, i)).copied().unwrap_or(1.0);
            }
        }
        w
    }
}

/// Sampled embedding: one point of R^3 per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingField {
    pub grid: Grid,
    pub x: Vec<Vec3>,
}

impl EmbeddingField {
    pub fn new(grid: Grid, x: Vec<Vec3>) -> Result<Self, ConfigError> {
        if x.len() != grid.len() {
            return Err(ConfigError::FieldLength {
                expected: grid.len(),
                got: x.len(),
            });
        }
        if let Some(idx) = x.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(ConfigError::NonFinite { node: grid.coords(idx) });
        }
        Ok(EmbeddingField { grid, x })
    }

    /// Uniform scaling `X -> s X`.
    pub fn scaled(&self, s: f64) -> Self {
        EmbeddingField {
            grid: self.grid.clone(),
            x: self.x.iter().map(|p| p * s).collect(),
        }
    }
}

/// Analytic surface catalog.
///
/// Every chart orders its parameters so that `e_1 x e_2` is the outward normal
/// on closed or tube-like surfaces; the bands use the colatitude measured from
/// the south pole for that reason.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SurfaceSpec {
    /// `R (sin t cos p, sin t sin p, -cos t)` for `t` in `[margin, pi - margin]`.
    SphereBand { radius: f64, margin: f64 },
    /// `(r cos p, r sin p, z)` for `z` in `[-length/2, length/2]`.
    Cylinder { radius: f64, length: f64 },
    /// `(c cosh(z/c) cos p, c cosh(z/c) sin p, z)` for `z` in `[-half_length, half_length]`.
    Catenoid { neck: f64, half_length: f64 },
    /// `((R + r cos q) cos p, (R + r cos q) sin p, r sin q)`.
    Torus { major: f64, minor: f64 },
    /// `(a sin t cos p, b sin t sin p, -c cos t)` for `t` in `[margin, pi - margin]`.
    EllipsoidBand { a: f64, b: f64, c: f64, margin: f64 },
    /// Gaussian bump `z = amplitude exp(-(u^2 + v^2) / (2 width^2))` over
    /// `[-extent, extent]^2`; `amplitude = 0` is the flat plane.
    Graph { amplitude: f64, width: f64, extent: f64 },
}

/// Analytic point data: position, first and second parameter derivatives.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub x: Vec3,
    pub e: [Vec3; 2],
    /// `xx[a][b] = d_a d_b X`.
    pub xx: [[Vec3; 2]; 2],
}

impl Frame {
    pub fn normal(&self) -> Vec3 {
        self.e[0].cross(&self.e[1]).normalize()
    }

    pub fn metric(&self) -> Mat2 {
        Mat2::new(
            self.e[0].dot(&self.e[0]),
            self.e[0].dot(&self.e[1]),
            self.e[1].dot(&self.e[0]),
            self.e[1].dot(&self.e[1]),
        )
    }

    /// `K_ab = e_a . d_b n = -n . d_a d_b X`.
    pub fn curvature(&self) -> Mat2 {
        let n = self.normal();
        Mat2::new(
            -n.dot(&self.xx[0][0]),
            -n.dot(&self.xx[0][1]),
            -n.dot(&self.xx[1][0]),
            -n.dot(&self.xx[1][1]),
        )
    }
}

impl SurfaceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceSpec::SphereBand { .. } => "sphere_band",
            SurfaceSpec::Cylinder { .. } => "cylinder",
            SurfaceSpec::Catenoid { .. } => "catenoid",
            SurfaceSpec::Torus { .. } => "torus",
            SurfaceSpec::EllipsoidBand { .. } => "ellipsoid_band",
            SurfaceSpec::Graph { .. } => "graph",
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Parameter {
                    name,
                    value: v,
                    reason: "must be finite and strictly positive",
                })
            }
        };
        let margin = |v: f64| {
            if v > 0.0 && v < PI / 2.0 {
                Ok(())
            } else {
                Err(ConfigError::Parameter {
                    name: "margin",
                    value: v,
                    reason: "band margin must lie in (0, pi/2)",
                })
            }
        };
        match *self {
            SurfaceSpec::SphereBand { radius, margin: m } => {
                positive("radius", radius)?;
                margin(m)
            }
            SurfaceSpec::Cylinder { radius, length } => {
                positive("radius", radius)?;
                positive("length", length)
            }
            SurfaceSpec::Catenoid { neck, half_length } => {
                positive("neck", neck)?;
                positive("half_length", half_length)
            }
            SurfaceSpec::Torus { major, minor } => {
                positive("major", major)?;
                positive("minor", minor)?;
                if minor >= major {
                    return Err(ConfigError::Parameter {
                        name: "minor",
                        value: minor,
                        reason: "torus must satisfy minor < major to be an immersion",
                    });
                }
                Ok(())
            }
            SurfaceSpec::EllipsoidBand { a, b, c, margin: m } => {
                positive("a", a)?;
                positive("b", b)?;
                positive("c", c)?;
                margin(m)
            }
            SurfaceSpec::Graph {
                amplitude,
                width,
                extent,
            } => {
                if !amplitude.is_finite() {
                    return Err(ConfigError::Parameter {
                        name: "amplitude",
                        value: amplitude,
                        reason: "must be finite",
                    });
                }
                positive("width", width)?;
                positive("extent", extent)
            }
        }
    }

    /// Boundary conditions the chart requires.
    pub fn boundaries(&self) -> [Boundary; 2] {
        use Boundary::*;
        match self {
            SurfaceSpec::Torus { .. } => [Periodic, Periodic],
            SurfaceSpec::Graph { .. } => [Clamped, Clamped],
            _ => [Periodic, Clamped],
        }
    }

    /// Parameter rectangle covered by the chart.
    pub fn natural_domain(&self) -> Domain {
        let full = [0.0, 2.0 * PI];
        match *self {
            SurfaceSpec::SphereBand { margin, .. } | SurfaceSpec::EllipsoidBand { margin, .. } => {
                Domain::new(full, [margin, PI - margin])
            }
            SurfaceSpec::Cylinder { length, .. } => Domain::new(full, [-length / 2.0, length / 2.0]),
            SurfaceSpec::Catenoid { half_length, .. } => {
                Domain::new(full, [-half_length, half_length])
            }
            SurfaceSpec::Torus { .. } => Domain::new(full, full),
            SurfaceSpec::Graph { extent, .. } => Domain::new([-extent, extent], [-extent, extent]),
        }
    }

    /// Grid over the natural domain with the required boundary conditions.
    pub fn natural_grid(&self, n1: usize, n2: usize) -> Result<Grid, ConfigError> {
        self.validate()?;
        let [bc1, bc2] = self.boundaries();
        Grid::new(self.natural_domain(), n1, n2, bc1, bc2)
    }

    /// Position, tangents and second derivatives at parameters `(u1, u2)`.
    pub fn frame(&self, u1: f64, u2: f64) -> Frame {
        let (sp, cp) = u1.sin_cos();
        match *self {
            SurfaceSpec::SphereBand { radius, margin: _ } => {
                ellipsoid_frame(radius, radius, radius, u1, u2)
            }
            SurfaceSpec::EllipsoidBand { a, b, c, margin: _ } => ellipsoid_frame(a, b, c, u1, u2),
            SurfaceSpec::Cylinder { radius: r, .. } => Frame {
                x: Vec3::new(r * cp, r * sp, u2),
                e: [Vec3::new(-r * sp, r * cp, 0.0), Vec3::new(0.0, 0.0, 1.0)],
                xx: [
                    [Vec3::new(-r * cp, -r * sp, 0.0), Vec3::zeros()],
                    [Vec3::zeros(), Vec3::zeros()],
                ],
            },
            SurfaceSpec::Catenoid { neck: c, .. } => {
                let ch = (u2 / c).cosh();
                let sh = (u2 / c).sinh();
                let mixed = Vec3::new(-sh * sp, sh * cp, 0.0);
                Frame {
                    x: Vec3::new(c * ch * cp, c * ch * sp, u2),
                    e: [
                        Vec3::new(-c * ch * sp, c * ch * cp, 0.0),
                        Vec3::new(sh * cp, sh * sp, 1.0),
                    ],
                    xx: [
                        [Vec3::new(-c * ch * cp, -c * ch * sp, 0.0), mixed],
                        [mixed, Vec3::new(ch / c * cp, ch / c * sp, 0.0)],
                    ],
                }
            }
            SurfaceSpec::Torus { major, minor } => {
                let (sq, cq) = u2.sin_cos();
                let w = major + minor * cq;
                let mixed = Vec3::new(minor * sq * sp, -minor * sq * cp, 0.0);
                Frame {
                    x: Vec3::new(w * cp, w * sp, minor * sq),
                    e: [
                        Vec3::new(-w * sp, w * cp, 0.0),
                        Vec3::new(-minor * sq * cp, -minor * sq * sp, minor * cq),
                    ],
                    xx: [
                        [Vec3::new(-w * cp, -w * sp, 0.0), mixed],
                        [
                            mixed,
                            Vec3::new(-minor * cq * cp, -minor * cq * sp, -minor * sq),
                        ],
                    ],
                }
            }
            SurfaceSpec::Graph {
                amplitude, width, ..
            } => {
                let (u, v) = (u1, u2);
                let w2 = width * width;
                let f = amplitude * (-(u * u + v * v) / (2.0 * w2)).exp();
                let fu = -u / w2 * f;
                let fv = -v / w2 * f;
                let fuu = (u * u / (w2 * w2) - 1.0 / w2) * f;
                let fvv = (v * v / (w2 * w2) - 1.0 / w2) * f;
                let fuv = u * v / (w2 * w2) * f;
                Frame {
                    x: Vec3::new(u, v, f),
                    e: [Vec3::new(1.0, 0.0, fu), Vec3::new(0.0, 1.0, fv)],
                    xx: [
                        [Vec3::new(0.0, 0.0, fuu), Vec3::new(0.0, 0.0, fuv)],
                        [Vec3::new(0.0, 0.0, fuv), Vec3::new(0.0, 0.0, fvv)],
                    ],
                }
            }
        }
    }

    /// Analytic frames at every node of `grid`.
    pub fn frames(&self, grid: &Grid) -> Vec<Frame> {
        (0..grid.len())
            .map(|idx| {
                let (u1, u2) = grid.params(idx);
                self.frame(u1, u2)
            })
            .collect()
    }

    /// Samples the embedding at every node of `grid`. The grid's boundary
    /// conditions must match the chart topology.
    pub fn sample(&self, grid: &Grid) -> Result<EmbeddingField, ConfigError> {
        self.validate()?;
        let required = self.boundaries();
        if grid.bc != required {
            return Err(ConfigError::IncompatibleBoundary {
                surface: self.name(),
                required,
                got: grid.bc,
            });
        }
        let natural = self.natural_domain();
        for dir in 0..2 {
            if grid.bc[dir] == Boundary::Periodic {
                let [lo, hi] = grid.domain.extent(dir);
                let [nlo, nhi] = natural.extent(dir);
                if ((hi - lo) - (nhi - nlo)).abs() > 1e-12 * (nhi - nlo) {
                    return Err(ConfigError::PeriodMismatch {
                        direction: dir + 1,
                        expected: nhi - nlo,
                        got: hi - lo,
                    });
                }
            }
        }
        if let SurfaceSpec::SphereBand { margin, .. } | SurfaceSpec::EllipsoidBand { margin, .. } =
            *self
        {
            let [lo, hi] = grid.domain.u2;
            if lo < margin - 1e-12 || hi > PI - margin + 1e-12 {
                return Err(ConfigError::Parameter {
                    name: "domain",
                    value: lo.min(PI - hi),
                    reason: "band chart must exclude colatitudes closer to the poles than the margin",
                });
            }
        }
        let x = (0..grid.len())
            .map(|idx| {
                let (u1, u2) = grid.params(idx);
                self.frame(u1, u2).x
            })
            .collect();
        EmbeddingField::new(grid.clone(), x)
    }
}

fn ellipsoid_frame(a: f64, b: f64, c: f64, phi: f64, theta: f64) -> Frame {
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = theta.sin_cos();
    Frame {
        x: Vec3::new(a * st * cp, b * st * sp, -c * ct),
        e: [
            Vec3::new(-a * st * sp, b * st * cp, 0.0),
            Vec3::new(a * ct * cp, b * ct * sp, c * st),
        ],
        xx: [
            [
                Vec3::new(-a * st * cp, -b * st * sp, 0.0),
                Vec3::new(-a * ct * sp, b * ct * cp, 0.0),
            ],
            [
                Vec3::new(-a * ct * sp, b * ct * cp, 0.0),
                Vec3::new(-a * st * cp, -b * st * sp, c * ct),
            ],
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spacing_periodic_by_clamped() {
        let g = Grid::new(
            Domain::new([0.0, 2.0 * PI], [0.0, 1.0]),
            64,
            33,
            Boundary::Periodic,
            Boundary::Clamped,
        )
        .unwrap();
        assert_eq!(g.h[0], 2.0 * PI / 64.0);
        assert_eq!(g.h[1], 1.0 / 32.0);
    }

    #[test]
    fn spacing_doubly_periodic() {
        let g = Grid::new(
            Domain::new([0.0, 2.0 * PI], [0.0, 2.0 * PI]),
            64,
            64,
            Boundary::Periodic,
            Boundary::Periodic,
        )
        .unwrap();
        assert_eq!(g.h, [2.0 * PI / 64.0; 2]);
    }

    #[test]
    fn tiny_grid_is_rejected_with_minimum() {
        let err = Grid::new(
            Domain::new([0.0, 1.0], [0.0, 1.0]),
            4,
            4,
            Boundary::Clamped,
            Boundary::Clamped,
        )
        .unwrap_err();
        assert!(matches!(err, ConfigError::TooFewNodes { min: 8, got: 4, .. }));
        assert!(err.to_string().contains('8'));
    }

    #[test]
    fn degenerate_domain_is_rejected() {
        let err = Grid::new(
            Domain::new([1.0, 1.0], [0.0, 1.0]),
            16,
            16,
            Boundary::Clamped,
            Boundary::Clamped,
        );
        assert!(matches!(err, Err(ConfigError::DegenerateDomain { .. })));
    }

    #[test]
    fn catalog_points() {
        let sphere = SurfaceSpec::SphereBand { radius: 1.0, margin: 0.3 };
        assert_abs_diff_eq!(sphere.frame(0.0, PI / 2.0).x, Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        let cyl = SurfaceSpec::Cylinder { radius: 2.0, length: 2.0 };
        assert_abs_diff_eq!(cyl.frame(PI, 0.5).x, Vec3::new(-2.0, 0.0, 0.5), epsilon = 1e-15);
        let torus = SurfaceSpec::Torus { major: 2f64.sqrt(), minor: 1.0 };
        assert_abs_diff_eq!(
            torus.frame(0.0, 0.0).x,
            Vec3::new(2f64.sqrt() + 1.0, 0.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn outward_normals() {
        let sphere = SurfaceSpec::SphereBand { radius: 1.0, margin: 0.3 };
        let f = sphere.frame(0.7, 1.1);
        assert_abs_diff_eq!(f.normal(), f.x, epsilon = 1e-14);
        let torus = SurfaceSpec::Torus { major: 2.0, minor: 0.5 };
        let f = torus.frame(0.0, 0.0);
        assert_abs_diff_eq!(f.normal(), Vec3::new(1.0, 0.0, 0.0), epsilon = 1e-14);
        let cyl = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 };
        let f = cyl.frame(0.4, 0.1);
        assert_abs_diff_eq!(f.normal(), Vec3::new(0.4f64.cos(), 0.4f64.sin(), 0.0), epsilon = 1e-14);
    }

    #[test]
    fn analytic_frames_match_finite_differences_of_position() {
        let specs = [
            SurfaceSpec::SphereBand { radius: 1.3, margin: 0.4 },
            SurfaceSpec::Catenoid { neck: 0.8, half_length: 1.0 },
            SurfaceSpec::Torus { major: 2.0, minor: 0.7 },
            SurfaceSpec::EllipsoidBand { a: 1.0, b: 1.5, c: 0.8, margin: 0.3 },
            SurfaceSpec::Graph { amplitude: 0.4, width: 0.6, extent: 1.0 },
        ];
        let d = 1e-5;
        for spec in specs {
            let (u, v) = (0.3, 0.2);
            let f = spec.frame(u, v);
            let du = (spec.frame(u + d, v).x - spec.frame(u - d, v).x) / (2.0 * d);
            let dv = (spec.frame(u, v + d).x - spec.frame(u, v - d).x) / (2.0 * d);
            assert_abs_diff_eq!(f.e[0], du, epsilon = 1e-8);
            assert_abs_diff_eq!(f.e[1], dv, epsilon = 1e-8);
            for b in 0..2 {
                let (pu, pv) = if b == 0 { (d, 0.0) } else { (0.0, d) };
                let de = (spec.frame(u + pu, v + pv).e[0] - spec.frame(u - pu, v - pv).e[0]) / (2.0 * d);
                assert_abs_diff_eq!(f.xx[0][b], de, epsilon = 1e-8);
                let de = (spec.frame(u + pu, v + pv).e[1] - spec.frame(u - pu, v - pv).e[1]) / (2.0 * d);
                assert_abs_diff_eq!(f.xx[1][b], de, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn incompatible_boundaries_are_rejected() {
        let torus = SurfaceSpec::Torus { major: 2.0, minor: 1.0 };
        let grid = SurfaceSpec::Cylinder { radius: 1.0, length: 1.0 }
            .natural_grid(16, 16)
            .unwrap();
        assert!(matches!(
            torus.sample(&grid),
            Err(ConfigError::IncompatibleBoundary { .. })
        ));
    }

    #[test]
    fn refinement_reproduces_coarse_nodes() {
        let spec = SurfaceSpec::Catenoid { neck: 1.0, half_length: 1.0 };
        let coarse = spec.sample(&spec.natural_grid(16, 17).unwrap()).unwrap();
        let fine = spec.sample(&spec.natural_grid(32, 33).unwrap()).unwrap();
        for i1 in 0..16 {
            for i2 in 0..17 {
                let c = coarse.x[coarse.grid.index(i1, i2)];
                let f = fine.x[fine.grid.index(2 * i1, 2 * i2)];
                assert_abs_diff_eq!(c, f, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn weights_integrate_cubics_exactly() {
        let spec = SurfaceSpec::Cylinder { radius: 1.0, length: 2.0 };
        let grid = spec.natural_grid(8, 11).unwrap();
        let total: f64 = (0..grid.len())
            .map(|i| {
                let (_, z) = grid.params(i);
                grid.weight(i) * (z.powi(3) + z.powi(2) - 2.0 * z + 1.0)
            })
            .sum();
        // 2 pi times the integral over [-1, 1]
        assert_abs_diff_eq!(total, 2.0 * PI * (2.0 / 3.0 + 2.0), epsilon = 1e-12);
    }

    #[test]
    fn weights_integrate_domain_area() {
        let spec = SurfaceSpec::Graph { amplitude: 0.0, width: 1.0, extent: 1.5 };
        let grid = spec.natural_grid(9, 12).unwrap();
        let area: f64 = (0..grid.len()).map(|i| grid.weight(i)).sum();
        assert_abs_diff_eq!(area, 9.0, epsilon = 1e-12);
    }
}

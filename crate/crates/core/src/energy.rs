//! Hamiltonian densities `H(g_ab, K_ab)`, their conjugates and the Lagrange
//! multipliers that enforce the geometric constraints.
//!
//! Densities are polynomials in the two invariants `I1 = g^ab K_ab` and
//! `I2 = K_ab K^ab`. The conjugates are
//!
//! * `H^ab = dH/dK_ab`,
//! * `T^ab = -2 (sqrt g)^-1 d(sqrt g H)/dg_ab`, taken at fixed `K_ab` (lower
//!   indices),
//!
//! both using the symmetric-pair convention
//! `dK_cd/dK_ab = (delta^a_c delta^b_d + delta^a_d delta^b_c) / 2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffgeo::{contract, cov_div_sym2, inverse, GeometryBundle};
use crate::error::ConfigError;
use crate::{Mat2, Vec2};

/// One monomial `c I1^p I2^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub c: f64,
    pub p: u32,
    pub q: u32,
}

/// Density `H = sum c_pq I1^p I2^q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelConfig", into = "ModelConfig")]
pub struct EnergyModel {
    terms: Vec<Term>,
    preset: Option<Preset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    SoapFilm,
    Willmore,
    Helfrich,
}

/// JSON form: `{"preset": "helfrich", "alpha": 1.0, "mu": 0.5}` or
/// `{"terms": [{"c": 1.0, "p": 2, "q": 0}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Term>>,
}

impl TryFrom<ModelConfig> for EnergyModel {
    type Error = ConfigError;

    fn try_from(cfg: ModelConfig) -> Result<Self, ConfigError> {
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| ConfigError::Model(format!("preset requires key `{key}`")))
        };
        match (cfg.preset, cfg.terms) {
            (Some(_), Some(_)) => Err(ConfigError::Model(
                "give either `preset` or `terms`, not both".into(),
            )),
            (None, None) => Err(ConfigError::Model(
                "missing key `preset` (or `terms`)".into(),
            )),
            (None, Some(terms)) => {
                if cfg.alpha.is_some() || cfg.mu.is_some() {
                    return Err(ConfigError::Model(
                        "`alpha`/`mu` only apply to presets".into(),
                    ));
                }
                EnergyModel::from_terms(terms)
            }
            (Some(Preset::SoapFilm), None) => {
                if cfg.alpha.is_some() {
                    return Err(ConfigError::Model("soap_film takes only `mu`".into()));
                }
                Ok(EnergyModel::soap_film(need(cfg.mu, "mu")?))
            }
            (Some(Preset::Willmore), None) => {
                if cfg.mu.is_some() {
                    return Err(ConfigError::Model("willmore takes only `alpha`".into()));
                }
                Ok(EnergyModel::willmore(need(cfg.alpha, "alpha")?))
            }
            (Some(Preset::Helfrich), None) => Ok(EnergyModel::helfrich(
                need(cfg.alpha, "alpha")?,
                need(cfg.mu, "mu")?,
            )),
        }
    }
}

impl From<EnergyModel> for ModelConfig {
    fn from(m: EnergyModel) -> Self {
        let coeff = |p, q| m.coefficient(p, q);
        match m.preset {
            Some(Preset::SoapFilm) => ModelConfig {
                preset: m.preset,
                alpha: None,
                mu: Some(coeff(0, 0)),
                terms: None,
            },
            Some(Preset::Willmore) => ModelConfig {
                preset: m.preset,
                alpha: Some(coeff(2, 0)),
                mu: None,
                terms: None,
            },
            Some(Preset::Helfrich) => ModelConfig {
                preset: m.preset,
                alpha: Some(coeff(2, 0)),
                mu: Some(coeff(0, 0)),
                terms: None,
            },
            None => ModelConfig {
                preset: None,
                alpha: None,
                mu: None,
                terms: Some(m.terms),
            },
        }
    }
}

/// Conjugates at a single node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConjugates {
    /// `H^ab = dH/dK_ab`.
    pub hab: Mat2,
    /// `T^ab = -2 (sqrt g)^-1 d(sqrt g H)/dg_ab`.
    pub tab: Mat2,
}

/// Conjugate fields over the grid.
#[derive(Debug, Clone)]
pub struct ConjugateFields {
    pub hab: Vec<Mat2>,
    pub tab: Vec<Mat2>,
}

/// Lagrange multipliers evaluated on shell.
#[derive(Debug, Clone)]
pub struct MultiplierField {
    /// `Lambda^ab = -H^ab`, enforces the definition of `K_ab`.
    pub lambda_k: Vec<Mat2>,
    /// `lambda^ab = T^ab / 2`, enforces the definition of `g_ab`.
    pub lambda_g: Vec<Mat2>,
    /// `lambda_perp^a = -nabla_b Lambda^ab`, enforces `e_a . n = 0`.
    pub lambda_perp: Vec<Vec2>,
    /// `lambda_n = Lambda^ab K_ab / 2`, enforces `n^2 = 1`.
    pub lambda_n: Vec<f64>,
}

impl EnergyModel {
    /// Builds a model from explicit monomials; `(p, q)` pairs must be unique.
    pub fn from_terms(terms: Vec<Term>) -> Result<Self, ConfigError> {
        for (i, t) in terms.iter().enumerate() {
            if !t.c.is_finite() {
                return Err(ConfigError::Model(format!("term {i} has a non-finite coefficient")));
            }
            if terms[..i].iter().any(|s| s.p == t.p && s.q == t.q) {
                return Err(ConfigError::Model(format!(
                    "duplicate term with p = {}, q = {}",
                    t.p, t.q
                )));
            }
        }
        Ok(EnergyModel { terms, preset: None })
    }

    /// Constant surface tension: `H = mu`.
    pub fn soap_film(mu: f64) -> Self {
        EnergyModel {
            terms: vec![Term { c: mu, p: 0, q: 0 }],
            preset: Some(Preset::SoapFilm),
        }
    }

    /// `H = alpha K^2`.
    pub fn willmore(alpha: f64) -> Self {
        EnergyModel {
            terms: vec![Term { c: alpha, p: 2, q: 0 }],
            preset: Some(Preset::Willmore),
        }
    }

    /// `H = alpha K^2 + mu`.
    pub fn helfrich(alpha: f64, mu: f64) -> Self {
        EnergyModel {
            terms: vec![Term { c: alpha, p: 2, q: 0 }, Term { c: mu, p: 0, q: 0 }],
            preset: Some(Preset::Helfrich),
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn preset(&self) -> Option<Preset> {
        self.preset
    }

    pub fn coefficient(&self, p: u32, q: u32) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.p == p && t.q == q)
            .map(|t| t.c)
            .sum()
    }

    /// True if the density does not depend on `K_ab`.
    pub fn is_intrinsic(&self) -> bool {
        self.terms.iter().all(|t| (t.p == 0 && t.q == 0) || t.c == 0.0)
    }

    /// Short label, e.g. `helfrich(alpha=1, mu=0.5)`.
    pub fn label(&self) -> String {
        match self.preset {
            Some(Preset::SoapFilm) => format!("soap_film(mu={})", self.coefficient(0, 0)),
            Some(Preset::Willmore) => format!("willmore(alpha={})", self.coefficient(2, 0)),
            Some(Preset::Helfrich) => format!(
                "helfrich(alpha={}, mu={})",
                self.coefficient(2, 0),
                self.coefficient(0, 0)
            ),
            None => {
                let parts: Vec<String> = self
                    .terms
                    .iter()
                    .map(|t| format!("{}*I1^{}*I2^{}", t.c, t.p, t.q))
                    .collect();
                parts.join(" + ")
            }
        }
    }

    /// Density from the inverse metric and covariant curvature.
    #[inline]
    pub fn density_at(&self, g_inv: &Mat2, k: &Mat2) -> f64 {
        let i1 = contract(g_inv, k);
        let i2 = contract(k, &(g_inv * k * g_inv));
        self.terms
            .iter()
            .map(|t| t.c * i1.powi(t.p as i32) * i2.powi(t.q as i32))
            .sum()
    }

    /// Density as a function of `(g_ab, K_ab)` only.
    pub fn density_of(&self, g: &Mat2, k: &Mat2) -> f64 {
        self.density_at(&inverse(g), k)
    }

    /// Closed-form conjugates at one node.
    ///
    /// With `dI1/dK_ab = g^ab`, `dI2/dK_ab = 2 K^ab`, `dI1/dg_ab = -K^ab` and
    /// `dI2/dg_ab = -2 K^ac g_cd K^db`:
    ///
    /// `H^ab = sum c (p I1^(p-1) I2^q g^ab + 2 q I1^p I2^(q-1) K^ab)`,
    /// `T^ab = -H g^ab + sum c (2 p I1^(p-1) I2^q K^ab + 4 q I1^p I2^(q-1) (KK)^ab)`.
    pub fn conjugates_at(&self, g_inv: &Mat2, k: &Mat2) -> NodeConjugates {
        let k_up = g_inv * k * g_inv;
        let kk_up = k_up * k * g_inv;
        let i1 = contract(g_inv, k);
        let i2 = contract(k, &k_up);
        let mut h = 0.0;
        let mut dh_di1 = 0.0;
        let mut dh_di2 = 0.0;
        for t in &self.terms {
            let (p, q) = (t.p as i32, t.q as i32);
            h += t.c * i1.powi(p) * i2.powi(q);
            if p > 0 {
                dh_di1 += t.c * f64::from(p) * i1.powi(p - 1) * i2.powi(q);
            }
            if q > 0 {
                dh_di2 += t.c * f64::from(q) * i1.powi(p) * i2.powi(q - 1);
            }
        }
        let hab = g_inv * dh_di1 + k_up * (2.0 * dh_di2);
        let tab = g_inv * (-h) + k_up * (2.0 * dh_di1) + kk_up * (4.0 * dh_di2);
        NodeConjugates {
            hab: symmetrize(&hab),
            tab: symmetrize(&tab),
        }
    }
}

#[inline]
fn symmetrize(m: &Mat2) -> Mat2 {
    let off = 0.5 * (m[(0, 1)] + m[(1, 0)]);
    Mat2::new(m[(0, 0)], off, off, m[(1, 1)])
}

/// Pointwise density `H`.
pub fn density(model: &EnergyModel, b: &GeometryBundle) -> Vec<f64> {
    (0..b.len())
        .into_par_iter()
        .map(|i| model.density_at(&b.g_inv[i], &b.k[i]))
        .collect()
}

/// `sum_nodes H sqrt(g) w` with trapezoidal weights in clamped directions.
pub fn total_energy(model: &EnergyModel, b: &GeometryBundle) -> f64 {
    density(model, b)
        .iter()
        .zip(b.area_weights())
        .map(|(h, w)| h * w)
        .sum()
}

/// Closed-form `H^ab` and `T^ab` at every node.
pub fn conjugates(model: &EnergyModel, b: &GeometryBundle) -> ConjugateFields {
    let (hab, tab) = (0..b.len())
        .into_par_iter()
        .map(|i| {
            let c = model.conjugates_at(&b.g_inv[i], &b.k[i]);
            (c.hab, c.tab)
        })
        .unzip();
    ConjugateFields { hab, tab }
}

/// Finite-difference conjugates at one node, used to validate the closed form.
///
/// Each independent component of `K_ab` (for `H^ab`) and of `g_ab` (for
/// `T^ab`, including the `sqrt g` factor) is perturbed by a central difference
/// of the scalar density. The step is `delta` times the largest entry of the
/// perturbed tensor (at least `delta`). Off-diagonal components move both
/// `(1,2)` and `(2,1)` entries together, and the resulting derivative is
/// halved: that is the symmetric-pair convention, under which the oracle and
/// the closed form agree without double-counting.
pub fn conjugates_fd_oracle(
    model: &EnergyModel,
    b: &GeometryBundle,
    node: usize,
    delta: f64,
) -> NodeConjugates {
    conjugates_fd_at(model, &b.g[node], &b.k[node], delta)
}

/// [`conjugates_fd_oracle`] on explicit `(g_ab, K_ab)`.
pub fn conjugates_fd_at(model: &EnergyModel, g: &Mat2, k: &Mat2, delta: f64) -> NodeConjugates {
    let basis = |a: usize, c: usize| {
        let mut m = Mat2::zeros();
        m[(a, c)] = 1.0;
        m[(c, a)] = 1.0;
        m
    };
    let weight = |a: usize, c: usize| if a == c { 1.0 } else { 0.5 };
    let scale = |m: &Mat2| delta * m.abs().max().max(1.0);

    let sk = scale(k);
    let sg = scale(g);
    let area = |g: &Mat2| g.determinant().sqrt();
    let weighted = |g: &Mat2| area(g) * model.density_of(g, k);
    let mut hab = Mat2::zeros();
    let mut tab = Mat2::zeros();
    for (a, c) in [(0, 0), (0, 1), (1, 1)] {
        let dk = basis(a, c) * sk;
        let dh = (model.density_of(g, &(k + dk)) - model.density_of(g, &(k - dk))) / (2.0 * sk);
        hab[(a, c)] = weight(a, c) * dh;
        hab[(c, a)] = hab[(a, c)];

        let dg = basis(a, c) * sg;
        let dw = (weighted(&(g + dg)) - weighted(&(g - dg))) / (2.0 * sg);
        tab[(a, c)] = -2.0 / area(g) * weight(a, c) * dw;
        tab[(c, a)] = tab[(a, c)];
    }
    NodeConjugates { hab, tab }
}

/// On-shell multipliers: `Lambda = -H`, `lambda = T / 2`,
/// `lambda_perp = -nabla_b Lambda^ab`, `lambda_n = Lambda^ab K_ab / 2`.
pub fn multipliers(b: &GeometryBundle, conj: &ConjugateFields) -> MultiplierField {
    let lambda_k: Vec<Mat2> = conj.hab.iter().map(|h| -h).collect();
    let lambda_g: Vec<Mat2> = conj.tab.iter().map(|t| t * 0.5).collect();
    let lambda_perp = cov_div_sym2(b, &lambda_k).into_iter().map(|v| -v).collect();
    let lambda_n = lambda_k
        .iter()
        .zip(&b.k)
        .map(|(l, k)| 0.5 * contract(l, k))
        .collect();
    MultiplierField {
        lambda_k,
        lambda_g,
        lambda_perp,
        lambda_n,
    }
}

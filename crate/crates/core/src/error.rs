use thiserror::Error;

use crate::chart::Boundary;

/// Invalid grid, surface or run configuration.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("direction {direction} has {got} nodes; the 4th-order stencils need at least {min}")]
    TooFewNodes {
        direction: usize,
        got: usize,
        min: usize,
    },
    #[error("direction {direction} has a degenerate parameter range [{lo}, {hi}]")]
    DegenerateDomain { direction: usize, lo: f64, hi: f64 },
    #[error("field has {got} entries but the grid has {expected} nodes")]
    FieldLength { expected: usize, got: usize },
    #[error("embedding is not finite at node {node:?}")]
    NonFinite { node: (usize, usize) },
    #[error("parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("{surface} requires boundary conditions {required:?}, grid has {got:?}")]
    IncompatibleBoundary {
        surface: &'static str,
        required: [Boundary; 2],
        got: [Boundary; 2],
    },
    #[error("periodic direction {direction} must span {expected}, got {got}")]
    PeriodMismatch {
        direction: usize,
        expected: f64,
        got: f64,
    },
    #[error("curve along direction {direction} is open: that direction is not periodic")]
    OpenCurve { direction: usize },
    #[error("curve index {index} is outside 0..{len}")]
    CurveIndex { index: usize, len: usize },
    #[error("node {node:?} is outside the {n:?} grid")]
    NodeIndex { node: [usize; 2], n: [usize; 2] },
    #[error("energy model: {0}")]
    Model(String),
    #[error("flow configuration: {0}")]
    Flow(String),
}

/// Failure to build a geometry bundle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(
        "embedding is not an immersion: sqrt(det g) = {sqrt_g:e} at node {node:?} (threshold {threshold:e})"
    )]
    Degenerate {
        node: (usize, usize),
        sqrt_g: f64,
        threshold: f64,
    },
}

//! Charts, smooth maps, and calculus of vector fields and forms along maps.

mod chart;
mod field;
mod form;
mod ops;

use thiserror::Error;

pub use chart::{Chart, ChartKind, Parity, SmoothMap};
pub use field::VectorFieldAlongMap;
pub use form::FormAlongMap;
pub use ops::{
    act, canonical_section, contract, exterior_derivative, lie_bracket, lie_derivative, phi_related, promote,
    pullback, pulled_differential, push_forward, restrict, tangent_map, CanonicalSection,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("chart mismatch: expected `{expected}`, found `{found}`")]
    ChartMismatch { expected: String, found: String },
    #[error("symbol `{symbol}` is not a coordinate of chart `{chart}`")]
    ForeignSymbol { symbol: String, chart: String },
    #[error("expected {expected} components, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("operation needs an object on an identity map")]
    NotOnIdentity,
    #[error("degree error: {0}")]
    DegreeError(String),
    #[error("chart `{0}` is not a tangent or cotangent bundle chart")]
    NotABundleChart(String),
}

impl GeometryError {
    pub(crate) fn chart_mismatch(expected: &Chart, found: &Chart) -> GeometryError {
        GeometryError::ChartMismatch { expected: expected.name().to_string(), found: found.name().to_string() }
    }
}

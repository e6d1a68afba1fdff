//! Structures of `TQ` and `T²Q`: Liouville field, vertical endomorphism,
//! lifts, second-order fields, Newtonoid projection and prolongation.

mod chart;
mod lifts;
mod sode;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use chart::TangentChart;
pub use lifts::{
    complete_lift, is_point_transformation, is_sode, liouville, newtonoid_project, prolong, tangent_lift,
    total_derivative_t1, total_field, vertical_endomorphism, vertical_lift_field, vertical_lift_fn,
};
pub use sode::{section_of_sode, sode_of_section, SODEField, SODESection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TangentError {
    #[error("not a second-order field: {0}")]
    NotASODE(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

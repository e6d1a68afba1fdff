use crate::geometry::{SmoothMap, VectorFieldAlongMap};
use crate::symcore::Expr;

use super::{TangentChart, TangentError};

/// A second-order field `v^i ∂/∂q^i + f^i ∂/∂v^i` on `TQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SODEField {
    chart: TangentChart,
    field: VectorFieldAlongMap,
}

impl SODEField {
    /// Accept a field on `TQ` whose position block is exactly the
    /// velocities.
    pub fn new(chart: &TangentChart, field: VectorFieldAlongMap) -> Result<SODEField, TangentError> {
        if !field.is_on_identity() || field.target() != chart.tq() {
            return Err(TangentError::NotASODE("field does not live on the tangent chart".into()));
        }
        let n = chart.dim();
        for i in 0..n {
            if field.component(i) != &chart.v(i) {
                return Err(TangentError::NotASODE(format!(
                    "component along {} is `{}`, expected `{}`",
                    chart.q_names()[i],
                    field.component(i),
                    chart.v(i)
                )));
            }
        }
        Ok(SODEField { chart: chart.clone(), field })
    }

    pub fn from_forces(chart: &TangentChart, forces: Vec<Expr>) -> Result<SODEField, TangentError> {
        if forces.len() != chart.dim() {
            return Err(TangentError::Geometry(crate::geometry::GeometryError::ComponentCount {
                expected: chart.dim(),
                found: forces.len(),
            }));
        }
        let mut comps = chart.velocities();
        comps.extend(forces);
        let field = VectorFieldAlongMap::on(chart.tq(), comps)?;
        Ok(SODEField { chart: chart.clone(), field })
    }

    pub fn chart(&self) -> &TangentChart {
        &self.chart
    }

    pub fn field(&self) -> &VectorFieldAlongMap {
        &self.field
    }

    /// The acceleration components `f^i`.
    pub fn forces(&self) -> &[Expr] {
        &self.field.components()[self.chart.dim()..]
    }
}

/// A section `γ: (q, v) ↦ (q, v, F(q, v))` of `τ_{2,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SODESection {
    chart: TangentChart,
    forces: Vec<Expr>,
}

impl SODESection {
    pub fn new(chart: &TangentChart, forces: Vec<Expr>) -> Result<SODESection, TangentError> {
        if forces.len() != chart.dim() {
            return Err(TangentError::Geometry(crate::geometry::GeometryError::ComponentCount {
                expected: chart.dim(),
                found: forces.len(),
            }));
        }
        for f in &forces {
            if let Some(s) = f.symbols().into_iter().find(|s| chart.tq().index_of(s).is_none()) {
                return Err(TangentError::Geometry(crate::geometry::GeometryError::ForeignSymbol {
                    symbol: s,
                    chart: chart.tq().name().to_string(),
                }));
            }
        }
        Ok(SODESection { chart: chart.clone(), forces })
    }

    pub fn forces(&self) -> &[Expr] {
        &self.forces
    }

    /// `γ` as a map `TQ → T²Q`.
    pub fn as_map(&self) -> SmoothMap {
        let mut comps = self.chart.tq().coord_exprs();
        comps.extend(self.forces.iter().cloned());
        SmoothMap::new(self.chart.tq().clone(), self.chart.t2q().clone(), comps).expect("forces live on TQ")
    }

    /// `γ*h`: substitute the accelerations.
    pub fn pull(&self, h: &Expr) -> Expr {
        self.as_map().pull(h)
    }
}

/// `Γ = T^(1) ∘ γ`.
pub fn sode_of_section(gamma: &SODESection) -> SODEField {
    SODEField::from_forces(&gamma.chart, gamma.forces.clone()).expect("section checked on construction")
}

pub fn section_of_sode(field: &SODEField) -> SODESection {
    SODESection { chart: field.chart.clone(), forces: field.forces().to_vec() }
}

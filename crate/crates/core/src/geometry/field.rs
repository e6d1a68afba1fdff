use std::fmt;

use crate::symcore::{Expr, Sampler};

use super::{Chart, GeometryError, SmoothMap};

/// A vector field along a map `φ: N → M`: one component per target
/// coordinate, each an expression in the source coordinates. With `φ` the
/// identity this is an ordinary vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldAlongMap {
    base: SmoothMap,
    components: Vec<Expr>,
}

impl VectorFieldAlongMap {
    pub fn new(base: SmoothMap, components: Vec<Expr>) -> Result<Self, GeometryError> {
        if components.len() != base.target().dim() {
            return Err(GeometryError::ComponentCount { expected: base.target().dim(), found: components.len() });
        }
        Ok(VectorFieldAlongMap { base, components })
    }

    /// An ordinary vector field on `chart`.
    pub fn on(chart: &Chart, components: Vec<Expr>) -> Result<Self, GeometryError> {
        VectorFieldAlongMap::new(SmoothMap::identity(chart), components)
    }

    pub fn zero(base: SmoothMap) -> Self {
        let n = base.target().dim();
        VectorFieldAlongMap { base, components: vec![Expr::zero(); n] }
    }

    /// The coordinate field `∂/∂x^i ∘ φ`.
    pub fn coordinate(base: SmoothMap, i: usize) -> Self {
        let mut f = VectorFieldAlongMap::zero(base);
        f.components[i] = Expr::one();
        f
    }

    pub fn base(&self) -> &SmoothMap {
        &self.base
    }

    pub fn source(&self) -> &Chart {
        self.base.source()
    }

    pub fn target(&self) -> &Chart {
        self.base.target()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.components[i]
    }

    pub fn is_on_identity(&self) -> bool {
        self.base.is_identity()
    }

    fn check_same_base(&self, other: &Self) -> Result<(), GeometryError> {
        if self.base != other.base {
            return Err(GeometryError::chart_mismatch(self.base.source(), other.base.source()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, GeometryError> {
        self.check_same_base(other)?;
        let comps = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(VectorFieldAlongMap { base: self.base.clone(), components: comps })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GeometryError> {
        self.check_same_base(other)?;
        let comps = self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect();
        Ok(VectorFieldAlongMap { base: self.base.clone(), components: comps })
    }

    /// Multiply by a function on the source.
    pub fn scale(&self, f: &Expr) -> Self {
        VectorFieldAlongMap { base: self.base.clone(), components: self.components.iter().map(|c| c * f).collect() }
    }

    pub fn map_components(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        VectorFieldAlongMap { base: self.base.clone(), components: self.components.iter().map(f).collect() }
    }

    /// Same components, reinterpreted along another map with the same target.
    pub fn with_base(&self, base: SmoothMap) -> Result<Self, GeometryError> {
        VectorFieldAlongMap::new(base, self.components.clone())
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.components.iter().all(Expr::is_zero)
    }

    /// Largest absolute component of `self - other` over random points.
    pub fn residual(&self, other: &Self, sampler: &mut Sampler, points: usize) -> Result<f64, GeometryError> {
        let d = self.sub(other)?;
        Ok(d.components.iter().map(|c| crate::symcore::max_abs(c, sampler, points)).fold(0.0, f64::max))
    }
}

impl fmt::Display for VectorFieldAlongMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ident = self.base.is_identity();
        let mut first = true;
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let coord = &self.base.target().coords()[i];
            let basis = if ident { format!("d/d{coord}") } else { format!("(d/d{coord} o {})", map_label(&self.base)) };
            if c.is_one() {
                f.write_str(&basis)?;
            } else {
                write!(f, "({c})*{basis}")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

pub(crate) fn map_label(m: &SmoothMap) -> String {
    format!("{}->{}", m.source().name(), m.target().name())
}

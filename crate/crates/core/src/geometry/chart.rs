use std::collections::{BTreeMap, BTreeSet};

use crate::symcore::Expr;

use super::GeometryError;

/// Grading of a coordinate. Only the even case is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
}

/// What kind of manifold a chart covers. Bundle charts list the base
/// coordinates first, followed by the fibre coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChartKind {
    Plain,
    Tangent(Box<Chart>),
    Cotangent(Box<Chart>),
    SecondTangent(Box<Chart>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    name: String,
    coords: Vec<String>,
    kind: ChartKind,
    parity: Vec<Parity>,
}

impl Chart {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        coords: impl IntoIterator<Item = S>,
    ) -> Result<Chart, GeometryError> {
        let name = name.into();
        let coords: Vec<String> = coords.into_iter().map(Into::into).collect();
        if coords.is_empty() {
            return Err(GeometryError::InvalidChart(format!("chart `{name}` has no coordinates")));
        }
        let mut seen = BTreeSet::new();
        for c in &coords {
            if !seen.insert(c.as_str()) {
                return Err(GeometryError::InvalidChart(format!("duplicate coordinate `{c}` in chart `{name}`")));
            }
        }
        let parity = vec![Parity::Even; coords.len()];
        Ok(Chart { name, coords, kind: ChartKind::Plain, parity })
    }

    fn bundle<S: Into<String>>(
        base: &Chart,
        name: String,
        fibres: Vec<Vec<S>>,
        kind: ChartKind,
    ) -> Result<Chart, GeometryError> {
        let mut coords = base.coords.clone();
        for f in fibres {
            let f: Vec<String> = f.into_iter().map(Into::into).collect();
            if f.len() != base.dim() {
                return Err(GeometryError::InvalidChart(format!(
                    "fibre of `{name}` needs {} coordinates, got {}",
                    base.dim(),
                    f.len()
                )));
            }
            coords.extend(f);
        }
        let mut chart = Chart::new(name, coords)?;
        chart.kind = kind;
        Ok(chart)
    }

    /// Natural chart `(x, v)` of the tangent bundle over `base`.
    pub fn tangent<S: Into<String>>(base: &Chart, velocities: Vec<S>) -> Result<Chart, GeometryError> {
        Chart::bundle(base, format!("T{}", base.name), vec![velocities], ChartKind::Tangent(Box::new(base.clone())))
    }

    /// Natural chart `(x, p)` of the cotangent bundle over `base`.
    pub fn cotangent<S: Into<String>>(base: &Chart, momenta: Vec<S>) -> Result<Chart, GeometryError> {
        Chart::bundle(base, format!("T*{}", base.name), vec![momenta], ChartKind::Cotangent(Box::new(base.clone())))
    }

    /// Natural chart `(x, v, a)` of the second-order tangent bundle.
    pub fn second_tangent<S: Into<String>>(
        base: &Chart,
        velocities: Vec<S>,
        accelerations: Vec<S>,
    ) -> Result<Chart, GeometryError> {
        Chart::bundle(
            base,
            format!("T2{}", base.name),
            vec![velocities, accelerations],
            ChartKind::SecondTangent(Box::new(base.clone())),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn kind(&self) -> &ChartKind {
        &self.kind
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    pub fn index_of(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    pub fn coord_exprs(&self) -> Vec<Expr> {
        self.coords.iter().map(|c| Expr::sym(c)).collect()
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::sym(&self.coords[i])
    }

    /// Base chart of a bundle chart.
    pub fn base(&self) -> Option<&Chart> {
        match &self.kind {
            ChartKind::Plain => None,
            ChartKind::Tangent(b) | ChartKind::Cotangent(b) | ChartKind::SecondTangent(b) => Some(b),
        }
    }

    /// Bundle projection onto the base chart.
    pub fn projection(&self) -> Result<SmoothMap, GeometryError> {
        let base = self.base().ok_or_else(|| GeometryError::NotABundleChart(self.name.clone()))?;
        SmoothMap::new(self.clone(), base.clone(), base.coord_exprs())
    }
}

/// A smooth map between two charts, given by one expression in the source
/// coordinates per target coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    source: Chart,
    target: Chart,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(source: Chart, target: Chart, components: Vec<Expr>) -> Result<SmoothMap, GeometryError> {
        if components.len() != target.dim() {
            return Err(GeometryError::ComponentCount { expected: target.dim(), found: components.len() });
        }
        for c in &components {
            for s in c.symbols() {
                if source.index_of(&s).is_none() {
                    return Err(GeometryError::ForeignSymbol { symbol: s, chart: source.name.clone() });
                }
            }
        }
        Ok(SmoothMap { source, target, components })
    }

    pub fn identity(chart: &Chart) -> SmoothMap {
        SmoothMap { source: chart.clone(), target: chart.clone(), components: chart.coord_exprs() }
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.components == self.source.coord_exprs()
    }

    fn bindings(&self) -> BTreeMap<String, Expr> {
        self.target.coords.iter().cloned().zip(self.components.iter().cloned()).collect()
    }

    /// `h ∘ φ` for an expression `h` in target coordinates.
    pub fn pull(&self, h: &Expr) -> Expr {
        if self.is_identity() {
            return h.clone();
        }
        h.substitute(&self.bindings())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SmoothMap) -> Result<SmoothMap, GeometryError> {
        if other.source != self.target {
            return Err(GeometryError::chart_mismatch(&self.target, &other.source));
        }
        let comps = other.components.iter().map(|c| self.pull(c)).collect();
        Ok(SmoothMap { source: self.source.clone(), target: other.target.clone(), components: comps })
    }

    /// Jacobian `∂φ^i/∂z^A`, one row per target coordinate.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.components
            .iter()
            .map(|c| self.source.coords.iter().map(|z| c.diff(z)).collect())
            .collect()
    }
}

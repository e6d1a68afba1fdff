use std::collections::BTreeMap;
use std::fmt;

use crate::symcore::{max_abs, Expr, Sampler};

use super::field::map_label;
use super::{Chart, GeometryError, SmoothMap, VectorFieldAlongMap};

/// A p-form along `φ: N → M`: coefficients on `dx^I ∘ φ` for strictly
/// increasing index tuples `I` of target coordinates, each an expression in
/// the source coordinates. Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FormAlongMap {
    base: SmoothMap,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Expr>,
}

/// Sort `idx` in place, returning the sign of the permutation, or `None`
/// when an index repeats.
fn sort_with_sign(idx: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

impl FormAlongMap {
    /// Build from `(indices, coefficient)` terms in any index order; terms
    /// with repeated indices vanish and duplicates are summed.
    pub fn from_terms(
        base: SmoothMap,
        degree: usize,
        terms: impl IntoIterator<Item = (Vec<usize>, Expr)>,
    ) -> Result<Self, GeometryError> {
        let dim = base.target().dim();
        let mut acc: BTreeMap<Vec<usize>, Vec<Expr>> = BTreeMap::new();
        for (mut idx, c) in terms {
            if idx.len() != degree {
                return Err(GeometryError::DegreeError(format!(
                    "term with {} indices in a {degree}-form",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(GeometryError::DegreeError(format!("index {bad} out of range for dimension {dim}")));
            }
            let Some(sign) = sort_with_sign(&mut idx) else { continue };
            acc.entry(idx).or_default().push(if sign < 0 { -c } else { c });
        }
        let coeffs = acc
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().sum::<Expr>()))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(FormAlongMap { base, degree, coeffs })
    }

    pub fn zero(base: SmoothMap, degree: usize) -> Self {
        FormAlongMap { base, degree, coeffs: BTreeMap::new() }
    }

    /// A function on the source, seen as a 0-form along `base`.
    pub fn scalar(base: SmoothMap, f: Expr) -> Self {
        let mut coeffs = BTreeMap::new();
        if !f.is_zero() {
            coeffs.insert(Vec::new(), f);
        }
        FormAlongMap { base, degree: 0, coeffs }
    }

    /// `Σ α_i (dx^i ∘ φ)`.
    pub fn one_form(base: SmoothMap, components: Vec<Expr>) -> Result<Self, GeometryError> {
        if components.len() != base.target().dim() {
            return Err(GeometryError::ComponentCount { expected: base.target().dim(), found: components.len() });
        }
        let terms: Vec<_> = components.into_iter().enumerate().map(|(i, c)| (vec![i], c)).collect();
        FormAlongMap::from_terms(base, 1, terms)
    }

    /// Coordinate differential `dx^i` on `chart`.
    pub fn differential(chart: &Chart, i: usize) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![i], Expr::one());
        FormAlongMap { base: SmoothMap::identity(chart), degree: 1, coeffs }
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

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_on_identity(&self) -> bool {
        self.base.is_identity()
    }

    /// Stored (sorted index, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.coeffs.iter()
    }

    /// Coefficient on `dx^{i_1} ∧ … ∧ dx^{i_p}` for indices in any order.
    pub fn coefficient(&self, indices: &[usize]) -> Expr {
        let mut idx = indices.to_vec();
        match sort_with_sign(&mut idx) {
            None => Expr::zero(),
            Some(s) => {
                let c = self.coeffs.get(&idx).cloned().unwrap_or_else(Expr::zero);
                if s < 0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    /// Coefficient by coordinate names.
    pub fn coefficient_named(&self, names: &[&str]) -> Option<Expr> {
        let idx: Option<Vec<usize>> = names.iter().map(|n| self.base.target().index_of(n)).collect();
        idx.map(|i| self.coefficient(&i))
    }

    /// The function of a 0-form.
    pub fn as_scalar(&self) -> Option<Expr> {
        (self.degree == 0).then(|| self.coefficient(&[]))
    }

    /// Components of a 1-form, one per target coordinate.
    pub fn components(&self) -> Option<Vec<Expr>> {
        (self.degree == 1).then(|| (0..self.base.target().dim()).map(|i| self.coefficient(&[i])).collect())
    }

    pub fn is_structurally_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn check_same_base(&self, other: &Self) -> Result<(), GeometryError> {
        if self.base != other.base {
            return Err(GeometryError::chart_mismatch(self.base.source(), other.base.source()));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self, GeometryError> {
        self.check_same_base(other)?;
        if self.degree != other.degree {
            return Err(GeometryError::DegreeError(format!(
                "cannot add a {}-form and a {}-form",
                self.degree, other.degree
            )));
        }
        let terms = self.coeffs.iter().map(|(k, v)| (k.clone(), v.clone())).chain(
            other.coeffs.iter().map(|(k, v)| (k.clone(), if sign < 0 { -v } else { v.clone() })),
        );
        FormAlongMap::from_terms(self.base.clone(), self.degree, terms)
    }

    pub fn add(&self, other: &Self) -> Result<Self, GeometryError> {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GeometryError> {
        self.combine(other, -1)
    }

    pub fn scale(&self, f: &Expr) -> Self {
        let coeffs =
            self.coeffs.iter().map(|(k, v)| (k.clone(), v * f)).filter(|(_, c)| !c.is_zero()).collect();
        FormAlongMap { base: self.base.clone(), degree: self.degree, coeffs }
    }

    pub fn neg(&self) -> Self {
        self.scale(&Expr::int(-1))
    }

    pub fn wedge(&self, other: &Self) -> Result<Self, GeometryError> {
        self.check_same_base(other)?;
        let mut terms = Vec::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                terms.push((idx, ca * cb));
            }
        }
        FormAlongMap::from_terms(self.base.clone(), self.degree + other.degree, terms)
    }

    /// `⟨α, X⟩` for a 1-form and a vector field along the same map.
    pub fn pair(&self, x: &VectorFieldAlongMap) -> Result<Expr, GeometryError> {
        if self.base != *x.base() {
            return Err(GeometryError::chart_mismatch(self.base.source(), x.source()));
        }
        if self.degree != 1 {
            return Err(GeometryError::DegreeError(format!("pairing needs a 1-form, got degree {}", self.degree)));
        }
        Ok(self.coeffs.iter().map(|(k, c)| c * x.component(k[0])).sum())
    }

    /// Same coefficients reinterpreted along another map with the same
    /// target.
    pub fn with_base(&self, base: SmoothMap) -> Result<Self, GeometryError> {
        if base.target() != self.base.target() {
            return Err(GeometryError::chart_mismatch(self.base.target(), base.target()));
        }
        Ok(FormAlongMap { base, degree: self.degree, coeffs: self.coeffs.clone() })
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, v)| (k.clone(), f(v))).filter(|(_, c)| !c.is_zero()).collect();
        FormAlongMap { base: self.base.clone(), degree: self.degree, coeffs }
    }

    /// Largest absolute coefficient of `self - other` over random points.
    pub fn residual(&self, other: &Self, sampler: &mut Sampler, points: usize) -> Result<f64, GeometryError> {
        let d = self.sub(other)?;
        Ok(d.coeffs.values().map(|c| max_abs(c, sampler, points)).fold(0.0, f64::max))
    }
}

impl fmt::Display for FormAlongMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let coords = self.base.target().coords();
        let ident = self.base.is_identity();
        for (n, (idx, c)) in self.coeffs.iter().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            if idx.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", coords[i])).collect();
            let mut basis = basis.join("^");
            if !ident {
                basis = format!("({basis} o {})", map_label(&self.base));
            }
            if c.is_one() {
                f.write_str(&basis)?;
            } else {
                write!(f, "({c})*{basis}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    fn plane() -> Chart {
        Chart::new("R2", ["x", "y"]).unwrap()
    }

    #[test]
    fn antisymmetry_is_structural() {
        let id = SmoothMap::identity(&plane());
        let f = FormAlongMap::from_terms(id.clone(), 2, [(vec![1, 0], ex("x"))]).unwrap();
        assert_eq!(f.coefficient(&[0, 1]), ex("-x"));
        assert_eq!(f.coefficient(&[1, 0]), ex("x"));
        let g = FormAlongMap::from_terms(id, 2, [(vec![1, 1], ex("x"))]).unwrap();
        assert!(g.is_structurally_zero());
    }

    #[test]
    fn wedge_of_differentials() {
        let c = plane();
        let dx = FormAlongMap::differential(&c, 0);
        let dy = FormAlongMap::differential(&c, 1);
        assert_eq!(dx.wedge(&dy).unwrap().coefficient(&[0, 1]), Expr::one());
        assert_eq!(dy.wedge(&dx).unwrap().coefficient(&[0, 1]), Expr::int(-1));
        assert!(dx.wedge(&dx).unwrap().is_structurally_zero());
        assert_eq!(dx.wedge(&dy).unwrap().to_string(), "dx^dy");
    }

    #[test]
    fn pairing() {
        let c = plane();
        let id = SmoothMap::identity(&c);
        let a = FormAlongMap::one_form(id, vec![ex("y"), ex("x")]).unwrap();
        let x = VectorFieldAlongMap::on(&c, vec![ex("1"), ex("2")]).unwrap();
        assert_eq!(a.pair(&x).unwrap(), ex("y + 2*x"));
    }
}

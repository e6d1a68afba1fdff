use crate::symcore::{Expr, Sampler, CHECK_POINTS, ZERO_TOL};

use super::{Chart, ChartKind, FormAlongMap, GeometryError, SmoothMap, VectorFieldAlongMap};

/// Jacobian of `φ`: rows are target coordinates, columns source coordinates.
pub fn tangent_map(phi: &SmoothMap) -> Vec<Vec<Expr>> {
    phi.jacobian()
}

/// `Tφ ∘ Y` for a vector field `Y` on the source of `φ`.
pub fn promote(y: &VectorFieldAlongMap, phi: &SmoothMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if !y.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    if y.target() != phi.source() {
        return Err(GeometryError::chart_mismatch(phi.source(), y.target()));
    }
    let comps = phi
        .jacobian()
        .into_iter()
        .map(|row| row.iter().zip(y.components()).map(|(j, c)| j * c).sum())
        .collect();
    VectorFieldAlongMap::new(phi.clone(), comps)
}

/// `X ∘ φ` for a vector field `X` on the target of `φ`.
pub fn restrict(x: &VectorFieldAlongMap, phi: &SmoothMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if !x.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    if x.target() != phi.target() {
        return Err(GeometryError::chart_mismatch(phi.target(), x.target()));
    }
    VectorFieldAlongMap::new(phi.clone(), x.components().iter().map(|c| phi.pull(c)).collect())
}

/// Whether `Tφ ∘ Y` and `X ∘ φ` agree at random points.
pub fn phi_related(
    y: &VectorFieldAlongMap,
    x: &VectorFieldAlongMap,
    phi: &SmoothMap,
    sampler: &mut Sampler,
) -> Result<bool, GeometryError> {
    let a = promote(y, phi)?;
    let b = restrict(x, phi)?;
    Ok(a.residual(&b, sampler, CHECK_POINTS)? <= ZERO_TOL)
}

/// `Tψ ∘ X` for `X` along `φ`, a field along `ψ ∘ φ`.
pub fn push_forward(psi: &SmoothMap, x: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if psi.source() != x.target() {
        return Err(GeometryError::chart_mismatch(psi.source(), x.target()));
    }
    let base = x.base().then(psi)?;
    let comps = psi
        .jacobian()
        .into_iter()
        .map(|row| row.iter().zip(x.components()).map(|(j, c)| x.base().pull(j) * c).sum())
        .collect();
    VectorFieldAlongMap::new(base, comps)
}

/// `X h = Σ X^i (∂h/∂x^i ∘ φ)`.
pub fn act(x: &VectorFieldAlongMap, h: &Expr) -> Expr {
    let base = x.base();
    x.target()
        .coords()
        .iter()
        .zip(x.components())
        .filter(|(_, c)| !c.is_zero())
        .map(|(xi, c)| c * base.pull(&h.diff(xi)))
        .sum()
}

/// Exterior derivative of a form on a chart.
pub fn exterior_derivative(alpha: &FormAlongMap) -> Result<FormAlongMap, GeometryError> {
    if !alpha.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    let coords = alpha.target().coords();
    let mut terms = Vec::new();
    for (idx, c) in alpha.terms() {
        for (k, xk) in coords.iter().enumerate() {
            let dc = c.diff(xk);
            if dc.is_zero() || idx.contains(&k) {
                continue;
            }
            let mut i = vec![k];
            i.extend_from_slice(idx);
            terms.push((i, dc));
        }
    }
    FormAlongMap::from_terms(alpha.base().clone(), alpha.degree() + 1, terms)
}

/// `φ*(dx^k) = Σ_A (∂φ^k/∂z^A) dz^A`, a 1-form on the source of `φ`.
pub fn pulled_differential(phi: &SmoothMap, k: usize) -> FormAlongMap {
    let row: Vec<Expr> = phi.source().coords().iter().map(|z| phi.components()[k].diff(z)).collect();
    FormAlongMap::one_form(SmoothMap::identity(phi.source()), row).expect("row length equals source dimension")
}

fn wedge_pulled(phi: &SmoothMap, idx: &[usize], cache: &[FormAlongMap]) -> FormAlongMap {
    let mut acc = FormAlongMap::scalar(SmoothMap::identity(phi.source()), Expr::one());
    for &i in idx {
        acc = acc.wedge(&cache[i]).expect("common base");
    }
    acc
}

fn check_on_target(omega: &FormAlongMap, target: &Chart) -> Result<(), GeometryError> {
    if !omega.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    if omega.target() != target {
        return Err(GeometryError::chart_mismatch(target, omega.target()));
    }
    Ok(())
}

/// `i_X ω` for `X` along `φ: N → M` and a p-form `ω` on `M`, returned as
/// the corresponding φ-semibasic (p−1)-form on `N`.
pub fn contract(x: &VectorFieldAlongMap, omega: &FormAlongMap) -> Result<FormAlongMap, GeometryError> {
    check_on_target(omega, x.target())?;
    let p = omega.degree();
    if p == 0 {
        return Err(GeometryError::DegreeError("cannot contract a vector field with a 0-form".into()));
    }
    let phi = x.base();
    let on_n = SmoothMap::identity(phi.source());
    if phi.is_identity() {
        let mut terms = Vec::new();
        for (idx, c) in omega.terms() {
            for (k, &ik) in idx.iter().enumerate() {
                let xk = x.component(ik);
                if xk.is_zero() {
                    continue;
                }
                let sign = if k % 2 == 0 { Expr::one() } else { Expr::int(-1) };
                let mut rest = idx.clone();
                rest.remove(k);
                terms.push((rest, sign * xk * c));
            }
        }
        return FormAlongMap::from_terms(on_n, p - 1, terms);
    }
    let cache: Vec<FormAlongMap> = (0..phi.target().dim()).map(|k| pulled_differential(phi, k)).collect();
    let mut acc = FormAlongMap::zero(on_n, p - 1);
    for (idx, c) in omega.terms() {
        let pulled_c = phi.pull(c);
        for (k, &ik) in idx.iter().enumerate() {
            let xk = x.component(ik);
            if xk.is_zero() {
                continue;
            }
            let mut coef = xk * &pulled_c;
            if k % 2 == 1 {
                coef = -coef;
            }
            let mut rest = idx.clone();
            rest.remove(k);
            acc = acc.add(&wedge_pulled(phi, &rest, &cache).scale(&coef))?;
        }
    }
    Ok(acc)
}

/// `d_X ω = i_X dω + d i_X ω`, a p-form on the source of `φ`. For a
/// function this is `X h`.
pub fn lie_derivative(x: &VectorFieldAlongMap, omega: &FormAlongMap) -> Result<FormAlongMap, GeometryError> {
    check_on_target(omega, x.target())?;
    let on_n = SmoothMap::identity(x.source());
    if omega.degree() == 0 {
        return Ok(FormAlongMap::scalar(on_n, act(x, &omega.coefficient(&[]))));
    }
    let a = contract(x, &exterior_derivative(omega)?)?;
    let b = exterior_derivative(&contract(x, omega)?)?;
    a.add(&b)
}

/// `φ*β` for a form `β` on the target of `φ`.
pub fn pullback(phi: &SmoothMap, beta: &FormAlongMap) -> Result<FormAlongMap, GeometryError> {
    check_on_target(beta, phi.target())?;
    let on_n = SmoothMap::identity(phi.source());
    if phi.is_identity() {
        return beta.with_base(on_n);
    }
    if beta.degree() == 0 {
        return Ok(FormAlongMap::scalar(on_n, phi.pull(&beta.coefficient(&[]))));
    }
    let cache: Vec<FormAlongMap> = (0..phi.target().dim()).map(|k| pulled_differential(phi, k)).collect();
    let mut acc = FormAlongMap::zero(on_n, beta.degree());
    for (idx, c) in beta.terms() {
        acc = acc.add(&wedge_pulled(phi, idx, &cache).scale(&phi.pull(c)))?;
    }
    Ok(acc)
}

/// The section of a tangent or cotangent bundle given by its identity map.
#[derive(Debug, Clone, PartialEq)]
pub enum CanonicalSection {
    /// `T = v^i (∂/∂x^i ∘ τ)` on a tangent bundle.
    Field(VectorFieldAlongMap),
    /// `θ̌₀ = p_i (dx^i ∘ π)` on a cotangent bundle.
    Form(FormAlongMap),
}

pub fn canonical_section(bundle: &Chart) -> Result<CanonicalSection, GeometryError> {
    let n = match bundle.kind() {
        ChartKind::Tangent(b) | ChartKind::Cotangent(b) => b.dim(),
        _ => return Err(GeometryError::NotABundleChart(bundle.name().to_string())),
    };
    let proj = bundle.projection()?;
    let fibre: Vec<Expr> = (n..2 * n).map(|i| bundle.coord(i)).collect();
    Ok(match bundle.kind() {
        ChartKind::Tangent(_) => CanonicalSection::Field(VectorFieldAlongMap::new(proj, fibre)?),
        _ => CanonicalSection::Form(FormAlongMap::one_form(proj, fibre)?),
    })
}

/// `[X, Y]^i = X(Y^i) − Y(X^i)` for vector fields on one chart.
pub fn lie_bracket(x: &VectorFieldAlongMap, y: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if !x.is_on_identity() || !y.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    if x.target() != y.target() {
        return Err(GeometryError::chart_mismatch(x.target(), y.target()));
    }
    let comps = x.components().iter().zip(y.components()).map(|(xi, yi)| act(x, yi) - act(y, xi)).collect();
    VectorFieldAlongMap::new(x.base().clone(), comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    fn q() -> Chart {
        Chart::new("Q", ["q"]).unwrap()
    }

    fn tq() -> Chart {
        Chart::tangent(&q(), vec!["v"]).unwrap()
    }

    fn field(c: &Chart, comps: &[&str]) -> VectorFieldAlongMap {
        VectorFieldAlongMap::on(c, comps.iter().map(|s| ex(s)).collect()).unwrap()
    }

    #[test]
    fn jacobians() {
        let tau = tq().projection().unwrap();
        assert_eq!(tangent_map(&tau), vec![vec![Expr::one(), Expr::zero()]]);
        let n = Chart::new("N", ["x", "y"]).unwrap();
        let m = Chart::new("M", ["u"]).unwrap();
        let phi = SmoothMap::new(n, m, vec![ex("x*y")]).unwrap();
        assert_eq!(tangent_map(&phi), vec![vec![ex("y"), ex("x")]]);
    }

    #[test]
    fn promote_and_restrict() {
        let tau = tq().projection().unwrap();
        let y = field(&tq(), &["v", "0"]);
        assert_eq!(promote(&y, &tau).unwrap().components(), &[ex("v")]);
        assert!(promote(&field(&tq(), &["0", "1"]), &tau).unwrap().is_structurally_zero());
        let x = field(&q(), &["q"]);
        let r = restrict(&x, &tau).unwrap();
        assert_eq!(r.components(), &[ex("q")]);
        let mut s = Sampler::new(1);
        assert!(phi_related(&field(&tq(), &["1", "0"]), &field(&q(), &["1"]), &tau, &mut s).unwrap());
        assert!(!phi_related(&field(&tq(), &["0", "1"]), &field(&q(), &["1"]), &tau, &mut s).unwrap());
        assert!(matches!(restrict(&y, &tau), Err(GeometryError::ChartMismatch { .. })));
    }

    #[test]
    fn exterior_derivative_examples() {
        let c = Chart::new("P", ["q", "p"]).unwrap();
        let id = SmoothMap::identity(&c);
        let q0 = FormAlongMap::scalar(id.clone(), ex("q"));
        assert_eq!(exterior_derivative(&q0).unwrap(), FormAlongMap::differential(&c, 0));
        let pdq = FormAlongMap::one_form(id, vec![ex("p"), ex("0")]).unwrap();
        let d = exterior_derivative(&pdq).unwrap();
        assert_eq!(d.coefficient(&[1, 0]), Expr::one());
        assert!(exterior_derivative(&d).unwrap().is_structurally_zero());
    }

    #[test]
    fn contraction_examples() {
        let t = tq();
        let CanonicalSection::Field(tt) = canonical_section(&t).unwrap() else { panic!() };
        let dq = FormAlongMap::differential(&q(), 0);
        assert_eq!(contract(&tt, &dq).unwrap().as_scalar(), Some(ex("v")));
        let w = FormAlongMap::differential(&t, 0).wedge(&FormAlongMap::differential(&t, 1)).unwrap();
        let r = contract(&field(&t, &["1", "0"]), &w).unwrap();
        assert_eq!(r, FormAlongMap::differential(&t, 1));
        assert!(matches!(
            contract(&tt, &FormAlongMap::scalar(SmoothMap::identity(&q()), ex("q"))),
            Err(GeometryError::DegreeError(_))
        ));
    }

    #[test]
    fn canonical_sections() {
        let t = tq();
        let CanonicalSection::Field(tt) = canonical_section(&t).unwrap() else { panic!() };
        assert_eq!(tt.components(), &[ex("v")]);
        let ts = Chart::cotangent(&q(), vec!["p"]).unwrap();
        let CanonicalSection::Form(th) = canonical_section(&ts).unwrap() else { panic!() };
        assert_eq!(th.components().unwrap(), vec![ex("p")]);
        assert!(matches!(canonical_section(&q()), Err(GeometryError::NotABundleChart(_))));
    }

    #[test]
    fn classical_lie_derivative() {
        let c = q();
        let id = SmoothMap::identity(&c);
        let qdq = FormAlongMap::one_form(id, vec![ex("q")]).unwrap();
        let l = lie_derivative(&field(&c, &["1"]), &qdq).unwrap();
        assert_eq!(l, FormAlongMap::differential(&c, 0));
        let t = tq();
        let CanonicalSection::Field(tt) = canonical_section(&t).unwrap() else { panic!() };
        let f = FormAlongMap::scalar(SmoothMap::identity(&c), ex("sin(q)"));
        assert_eq!(lie_derivative(&tt, &f).unwrap().as_scalar(), Some(ex("cos(q)*v")));
    }

    #[test]
    fn pullback_through_projection() {
        let t = tq();
        let tau = t.projection().unwrap();
        let dq = FormAlongMap::differential(&q(), 0);
        assert_eq!(pullback(&tau, &dq).unwrap(), FormAlongMap::differential(&t, 0));
    }

    #[test]
    fn bracket() {
        let c = Chart::new("R3", ["x", "y", "z"]).unwrap();
        let b = lie_bracket(&field(&c, &["1", "0", "0"]), &field(&c, &["0", "1", "x"])).unwrap();
        assert_eq!(b.components(), &[ex("0"), ex("0"), ex("1")]);
    }
}

use crate::geometry::{
    act, canonical_section, lie_bracket, restrict, CanonicalSection, GeometryError, SmoothMap, VectorFieldAlongMap,
};
use crate::symcore::{Expr, Sampler, CHECK_POINTS, ZERO_TOL};

use super::{SODEField, TangentChart, TangentError};

/// The canonical field `T = v^i (∂/∂q^i ∘ τ)` along `τ`.
pub fn total_field(tc: &TangentChart) -> VectorFieldAlongMap {
    match canonical_section(tc.tq()) {
        Ok(CanonicalSection::Field(t)) => t,
        _ => unreachable!("tangent chart carries a tangent bundle kind"),
    }
}

/// `Δ = v^i ∂/∂v^i`.
pub fn liouville(tc: &TangentChart) -> VectorFieldAlongMap {
    let mut comps = vec![Expr::zero(); tc.dim()];
    comps.extend(tc.velocities());
    VectorFieldAlongMap::on(tc.tq(), comps).expect("2n components")
}

fn on_tq(tc: &TangentChart, y: &VectorFieldAlongMap) -> Result<(), GeometryError> {
    if !y.is_on_identity() {
        return Err(GeometryError::NotOnIdentity);
    }
    if y.target() != tc.tq() {
        return Err(GeometryError::chart_mismatch(tc.tq(), y.target()));
    }
    Ok(())
}

/// Bring a field on `Q` or along `τ` to a field along `τ`.
fn along_tau(tc: &TangentChart, x: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if x.base() == tc.tau() {
        Ok(x.clone())
    } else if x.is_on_identity() && x.target() == tc.base() {
        restrict(x, tc.tau())
    } else {
        Err(GeometryError::chart_mismatch(tc.tau().source(), x.source()))
    }
}

/// `S(Y)`: the `∂/∂q` block moves to the `∂/∂v` slots.
pub fn vertical_endomorphism(tc: &TangentChart, y: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    on_tq(tc, y)?;
    let n = tc.dim();
    let mut comps = vec![Expr::zero(); n];
    comps.extend(y.components()[..n].iter().cloned());
    VectorFieldAlongMap::on(tc.tq(), comps)
}

/// `f^V = d_T f` for a function on `Q`.
pub fn vertical_lift_fn(tc: &TangentChart, f: &Expr) -> Result<Expr, GeometryError> {
    if let Some(s) = f.symbols().into_iter().find(|s| tc.base().index_of(s).is_none()) {
        return Err(GeometryError::ForeignSymbol { symbol: s, chart: tc.base().name().to_string() });
    }
    Ok(act(&total_field(tc), f))
}

/// `X^V = X^i ∂/∂v^i` for a field along `τ` (or on `Q`).
pub fn vertical_lift_field(tc: &TangentChart, x: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    let x = along_tau(tc, x)?;
    let mut comps = vec![Expr::zero(); tc.dim()];
    comps.extend(x.components().iter().cloned());
    VectorFieldAlongMap::on(tc.tq(), comps)
}

/// `Y^c = Y^i ∂/∂q^i + v^j (∂Y^i/∂q^j) ∂/∂v^i`.
pub fn complete_lift(tc: &TangentChart, y: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    if !y.is_on_identity() || y.target() != tc.base() {
        return Err(GeometryError::chart_mismatch(tc.base(), y.target()));
    }
    let t = total_field(tc);
    let mut comps: Vec<Expr> = y.components().to_vec();
    comps.extend(y.components().iter().map(|c| act(&t, c)));
    VectorFieldAlongMap::on(tc.tq(), comps)
}

/// The tangent map `Tφ: TQ → TQ` of a map `φ: Q → Q`.
pub fn tangent_lift(tc: &TangentChart, phi: &SmoothMap) -> Result<SmoothMap, GeometryError> {
    if phi.source() != tc.base() || phi.target() != tc.base() {
        return Err(GeometryError::chart_mismatch(tc.base(), phi.source()));
    }
    let t = total_field(tc);
    let mut comps: Vec<Expr> = phi.components().to_vec();
    comps.extend(phi.components().iter().map(|c| act(&t, c)));
    SmoothMap::new(tc.tq().clone(), tc.tq().clone(), comps)
}

/// Whether `Φ: TQ → TQ` commutes with `S` and preserves `Δ`, checked at
/// random points.
pub fn is_point_transformation(
    tc: &TangentChart,
    phi: &SmoothMap,
    sampler: &mut Sampler,
) -> Result<bool, GeometryError> {
    if phi.source() != tc.tq() || phi.target() != tc.tq() {
        return Err(GeometryError::chart_mismatch(tc.tq(), phi.source()));
    }
    let n = tc.dim();
    let m = 2 * n;
    let jac = phi.jacobian();
    let mut exprs: Vec<Expr> = jac.iter().flatten().cloned().collect();
    exprs.extend(phi.components().iter().cloned());
    exprs.extend(tc.tq().coord_exprs());
    let rows = sampler.evaluate(&exprs, CHECK_POINTS);
    if rows.is_empty() {
        return Ok(false);
    }
    for r in rows {
        let j = |a: usize, b: usize| r[a * m + b];
        let img = &r[m * m..m * m + m];
        let z = &r[m * m + m..];
        for a in 0..m {
            for i in 0..n {
                // (JS)_{a,i} = J_{a,n+i}; (SJ)_{a,b} = J_{a-n,b} for a ≥ n.
                let js = j(a, n + i);
                let sj = if a >= n { j(a - n, i) } else { 0.0 };
                let sj2 = if a >= n { j(a - n, n + i) } else { 0.0 };
                if (js - sj).abs() > ZERO_TOL || sj2.abs() > ZERO_TOL {
                    return Ok(false);
                }
            }
            let jd: f64 = (0..n).map(|i| j(a, n + i) * z[n + i]).sum();
            let d_img = if a >= n { img[a] } else { 0.0 };
            if (jd - d_img).abs() > ZERO_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `X(D) = X + S([D, X])`, which has components `(η^i, D η^i)`.
pub fn newtonoid_project(
    tc: &TangentChart,
    x: &VectorFieldAlongMap,
    d: &VectorFieldAlongMap,
) -> Result<VectorFieldAlongMap, TangentError> {
    let d = SODEField::new(tc, d.clone())?;
    on_tq(tc, x)?;
    let br = lie_bracket(d.field(), x)?;
    Ok(x.add(&vertical_endomorphism(tc, &br)?)?)
}

/// `T^(1) = v^i (∂/∂q^i ∘ τ_{2,1}) + a^i (∂/∂v^i ∘ τ_{2,1})`.
pub fn total_derivative_t1(tc: &TangentChart) -> VectorFieldAlongMap {
    let mut comps = tc.velocities();
    comps.extend(tc.accelerations());
    VectorFieldAlongMap::new(tc.tau21().clone(), comps).expect("2n components")
}

/// `X^(1) = η^i (∂/∂q^i ∘ τ_{2,1}) + T^(1)(η^i) (∂/∂v^i ∘ τ_{2,1})` for
/// `X = η^i (∂/∂q^i ∘ τ)`.
pub fn prolong(tc: &TangentChart, x: &VectorFieldAlongMap) -> Result<VectorFieldAlongMap, GeometryError> {
    let x = along_tau(tc, x)?;
    let t1 = total_derivative_t1(tc);
    let mut comps: Vec<Expr> = x.components().to_vec();
    comps.extend(x.components().iter().map(|c| act(&t1, c)));
    VectorFieldAlongMap::new(tc.tau21().clone(), comps)
}

/// `S(X) = Δ`, decided structurally.
pub fn is_sode(tc: &TangentChart, x: &VectorFieldAlongMap) -> bool {
    vertical_endomorphism(tc, x).is_ok_and(|s| s == liouville(tc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;

    fn t1() -> TangentChart {
        TangentChart::new(&["q"]).unwrap()
    }

    fn t2() -> TangentChart {
        TangentChart::with_velocities(&["q1", "q2"], &["v1", "v2"]).unwrap()
    }

    fn f(c: &crate::geometry::Chart, comps: &[&str]) -> VectorFieldAlongMap {
        VectorFieldAlongMap::on(c, comps.iter().map(|s| ex(s)).collect()).unwrap()
    }

    #[test]
    fn liouville_is_vertical_lift_of_total_field() {
        for tc in [t1(), t2()] {
            assert_eq!(liouville(&tc), vertical_lift_field(&tc, &total_field(&tc)).unwrap());
        }
        let tc = t1();
        assert_eq!(act(&liouville(&tc), &ex("v^2/2")), ex("v^2"));
    }

    #[test]
    fn vertical_endomorphism_examples() {
        let tc = t1();
        assert_eq!(vertical_endomorphism(&tc, &f(tc.tq(), &["1", "0"])).unwrap(), f(tc.tq(), &["0", "1"]));
        let sode = f(tc.tq(), &["v", "-q"]);
        assert_eq!(vertical_endomorphism(&tc, &sode).unwrap(), liouville(&tc));
        let y = f(tc.tq(), &["q*v", "sin(q)"]);
        let s = vertical_endomorphism(&tc, &y).unwrap();
        assert!(vertical_endomorphism(&tc, &s).unwrap().is_structurally_zero());
    }

    #[test]
    fn function_lifts() {
        let tc = t1();
        assert_eq!(vertical_lift_fn(&tc, &ex("q")).unwrap(), ex("v"));
        assert_eq!(vertical_lift_fn(&tc, &ex("q^2")).unwrap(), ex("2*q*v"));
        assert_eq!(vertical_lift_fn(&tc, &ex("sin(q)")).unwrap(), ex("cos(q)*v"));
        assert!(vertical_lift_fn(&tc, &ex("v")).is_err());
    }

    #[test]
    fn complete_lifts() {
        let tc = t2();
        let rot = f(tc.base(), &["-q2", "q1"]);
        assert_eq!(complete_lift(&tc, &rot).unwrap(), f(tc.tq(), &["-q2", "q1", "-v2", "v1"]));
        let tc = t1();
        assert_eq!(complete_lift(&tc, &f(tc.base(), &["q"])).unwrap(), f(tc.tq(), &["q", "v"]));
    }

    #[test]
    fn point_transformations() {
        let tc = t1();
        let mut s = Sampler::new(2);
        let sq = SmoothMap::new(tc.base().clone(), tc.base().clone(), vec![ex("q^2")]).unwrap();
        let lifted = tangent_lift(&tc, &sq).unwrap();
        assert!(is_point_transformation(&tc, &lifted, &mut s).unwrap());
        let bad = SmoothMap::new(tc.tq().clone(), tc.tq().clone(), vec![ex("q"), ex("v^2")]).unwrap();
        assert!(!is_point_transformation(&tc, &bad, &mut s).unwrap());
        assert!(is_point_transformation(&tc, &SmoothMap::identity(tc.tq()), &mut s).unwrap());
    }

    #[test]
    fn newtonoid_examples() {
        let tc = t1();
        let d = f(tc.tq(), &["v", "-q*v"]);
        let x = f(tc.tq(), &["1", "q"]);
        assert_eq!(newtonoid_project(&tc, &x, &d).unwrap(), f(tc.tq(), &["1", "0"]));
        let x = f(tc.tq(), &["v", "0"]);
        assert_eq!(newtonoid_project(&tc, &x, &d).unwrap(), d);
        let not_sode = f(tc.tq(), &["q", "0"]);
        assert!(matches!(newtonoid_project(&tc, &x, &not_sode), Err(TangentError::NotASODE(_))));
    }

    #[test]
    fn prolongation() {
        let tc = t1();
        let t1f = total_derivative_t1(&tc);
        assert_eq!(act(&t1f, &ex("q")), ex("v"));
        assert_eq!(act(&t1f, &ex("v")), ex("a"));
        assert_eq!(act(&t1f, &ex("v^2/2")), ex("v*a"));
        let x = VectorFieldAlongMap::new(tc.tau().clone(), vec![ex("v")]).unwrap();
        assert_eq!(prolong(&tc, &x).unwrap().components(), &[ex("v"), ex("a")]);
        let y = f(tc.base(), &["1"]);
        assert_eq!(prolong(&tc, &y).unwrap().components(), &[ex("1"), ex("0")]);
    }
}

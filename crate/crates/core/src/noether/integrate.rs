use crate::geometry::{act, VectorFieldAlongMap};
use crate::lagrangian::LagrangianSystem;
use crate::symcore::{is_zero, Expr, Node, Rational, Sampler};
use crate::tangentgeo::prolong;

use super::{check_thm2, NoetherError};

/// Term-by-term antiderivative in `x` by the power rule. Each term must be
/// a product of factors free of `x` and at most one power `x^k`, `k ≠ −1`.
pub fn antiderivative(e: &Expr, x: &str) -> Option<Expr> {
    let mut out = Vec::new();
    let xs = Expr::sym(x);
    for t in e.terms() {
        if !t.contains_symbol(x) {
            out.push(t * &xs);
            continue;
        }
        let factors = match t.node() {
            Node::Mul(fs) => fs.clone(),
            _ => vec![t.clone()],
        };
        let mut k: Option<Rational> = None;
        let mut rest = Vec::new();
        for f in factors {
            if !f.contains_symbol(x) {
                rest.push(f);
                continue;
            }
            let exp = match f.node() {
                Node::Sym(s) if &**s == x => Rational::from_integer(1),
                Node::Pow(b, r) if b.as_symbol() == Some(x) => *r,
                _ => return None,
            };
            if k.replace(exp).is_some() || exp == Rational::from_integer(-1) {
                return None;
            }
        }
        let k1 = k.expect("term contains x") + Rational::from_integer(1);
        let coef: Expr = rest.into_iter().product();
        out.push(coef * xs.pow_rational(k1) * Expr::from_rational(k1.recip()));
    }
    Some(out.into_iter().sum())
}

/// Integrate the gradient `∂F/∂y^i = c_i` over the listed variables.
fn potential(components: &[Expr], vars: &[String], sampler: &mut Sampler) -> Result<Expr, NoetherError> {
    let mut f = Expr::zero();
    for (i, (c, y)) in components.iter().zip(vars).enumerate() {
        let rem = c - f.diff(y);
        if vars[..i].iter().any(|w| !is_zero(&rem.diff(w), sampler)) {
            return Err(NoetherError::CannotIntegrate(format!("non-exact gradient component `{c}`")));
        }
        let prim = antiderivative(&rem, y).ok_or_else(|| NoetherError::CannotIntegrate(rem.to_string()))?;
        f = f + prim;
    }
    Ok(f)
}

/// Gauge term `F` with `X^(1) L = T^(1) F`, found by term-wise power-rule
/// integration in the velocities and then in the positions.
pub fn derive_f(
    sys: &LagrangianSystem,
    x: &VectorFieldAlongMap,
    sampler: &mut Sampler,
) -> Result<Expr, NoetherError> {
    sys.require_regular()?;
    let tc = sys.chart();
    let x1 = prolong(tc, x)?;
    let r = act(&x1, sys.lagrangian());
    let accs = tc.a_names();
    let c: Vec<Expr> = accs.iter().map(|a| r.diff(a)).collect();
    if c.iter().any(|ci| accs.iter().any(|a| ci.contains_symbol(a))) {
        return Err(NoetherError::CannotIntegrate(r.to_string()));
    }
    let fv = potential(&c, tc.v_names(), sampler)?;
    let zero_a = accs.iter().map(|a| (a.clone(), Expr::zero())).collect();
    let r0 = r.substitute(&zero_a);
    let t = crate::tangentgeo::total_field(tc);
    let s = r0 - act(&t, &fv);
    let sq: Vec<Expr> = tc.v_names().iter().map(|v| s.diff(v)).collect();
    if sq.iter().any(|si| tc.v_names().iter().any(|v| !is_zero(&si.diff(v), sampler))) {
        return Err(NoetherError::CannotIntegrate(s.to_string()));
    }
    let h = potential(&sq, tc.q_names(), sampler)?;
    let f = fv + h;
    if !check_thm2(sys, x, &f, sampler)?.is_symmetry() {
        return Err(NoetherError::CannotIntegrate(r.to_string()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;
    use crate::tangentgeo::TangentChart;

    #[test]
    fn power_rule() {
        assert_eq!(antiderivative(&ex("3*v^2 + q*v + 2"), "v").unwrap(), ex("v^3 + q*v^2/2 + 2*v"));
        assert_eq!(antiderivative(&ex("v^(-2)"), "v").unwrap(), ex("-v^(-1)"));
        assert!(antiderivative(&ex("v^(-1)"), "v").is_none());
        assert!(antiderivative(&ex("sin(v)"), "v").is_none());
    }

    #[test]
    fn gauge_for_dilation_field() {
        let c = TangentChart::new(&["q"]).unwrap();
        let mut s = Sampler::new(3);
        let free = LagrangianSystem::build(ex("v^2/2"), &c, &mut s).unwrap();
        let x = VectorFieldAlongMap::new(c.tau().clone(), vec![ex("v")]).unwrap();
        assert_eq!(derive_f(&free, &x, &mut s).unwrap(), ex("v^2/2"));
        let grav = LagrangianSystem::build(ex("v^2/2 - q"), &c, &mut s).unwrap();
        let x = VectorFieldAlongMap::new(c.tau().clone(), vec![ex("v")]).unwrap();
        assert_eq!(derive_f(&grav, &x, &mut s).unwrap(), ex("v^2/2 - q"));
        let x = VectorFieldAlongMap::new(c.tau().clone(), vec![ex("1")]).unwrap();
        assert!(matches!(derive_f(&grav, &x, &mut s), Err(NoetherError::CannotIntegrate(_))));
    }
}

use std::collections::BTreeMap;

use crate::geometry::{GeometryError, VectorFieldAlongMap};
use crate::symcore::{CompiledVec, Expr};
use crate::tangentgeo::{SODEField, TangentChart};

use super::{norm, rk4, steps, DynamicsError, NumericCurve, BLOWUP_NORM};

/// Coefficients `Γ^i_j(q, v)` of a (possibly nonlinear) connection on `TQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    chart: TangentChart,
    coeffs: Vec<Vec<Expr>>,
    christoffel: Option<Vec<Vec<Vec<Expr>>>>,
    guard: Option<Expr>,
}

/// Values within this distance of zero of the guard expression count as
/// a chart singularity.
pub const GUARD_TOL: f64 = 1e-6;

fn check_square<T>(m: &[Vec<T>], n: usize) -> Result<(), DynamicsError> {
    if m.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(GeometryError::ComponentCount { expected: n * n, found: m.iter().map(Vec::len).sum() }.into());
    }
    Ok(())
}

impl Connection {
    pub fn new(chart: &TangentChart, coeffs: Vec<Vec<Expr>>) -> Result<Connection, DynamicsError> {
        check_square(&coeffs, chart.dim())?;
        for c in coeffs.iter().flatten() {
            if let Some(s) = c.symbols().into_iter().find(|s| chart.tq().index_of(s).is_none()) {
                return Err(GeometryError::ForeignSymbol { symbol: s, chart: chart.tq().name().to_string() }.into());
            }
        }
        Ok(Connection { chart: chart.clone(), coeffs, christoffel: None, guard: None })
    }

    /// Linear connection from Christoffel symbols `Γ^i_{jk}(q)`, indexed
    /// `[i][j][k]`, with `Γ^i_j = Γ^i_{jk} v^k`.
    pub fn linear(chart: &TangentChart, christoffel: Vec<Vec<Vec<Expr>>>) -> Result<Connection, DynamicsError> {
        let n = chart.dim();
        check_square(&christoffel, n)?;
        for row in &christoffel {
            check_square(row, n)?;
        }
        let coeffs = christoffel
            .iter()
            .map(|gi| gi.iter().map(|gij| gij.iter().zip(chart.velocities()).map(|(g, v)| g * v).sum()).collect())
            .collect();
        let mut c = Connection::new(chart, coeffs)?;
        c.christoffel = Some(christoffel);
        Ok(c)
    }

    pub fn flat(chart: &TangentChart) -> Connection {
        let n = chart.dim();
        Connection::new(chart, vec![vec![Expr::zero(); n]; n]).expect("zero coefficients")
    }

    /// Abort integrations where `|guard| < 1e-6`.
    pub fn with_guard(mut self, guard: Expr) -> Connection {
        self.guard = Some(guard);
        self
    }

    pub fn chart(&self) -> &TangentChart {
        &self.chart
    }

    pub fn coefficients(&self) -> &[Vec<Expr>] {
        &self.coeffs
    }

    pub fn christoffel(&self) -> Option<&[Vec<Vec<Expr>>]> {
        self.christoffel.as_deref()
    }

    pub fn guard(&self) -> Option<&Expr> {
        self.guard.as_ref()
    }

    /// The geodesic spray `v^i ∂/∂q^i − Γ^i_j v^j ∂/∂v^i`.
    pub fn spray(&self) -> SODEField {
        let forces = self
            .coeffs
            .iter()
            .map(|row| -row.iter().zip(self.chart.velocities()).map(|(g, v)| g * v).sum::<Expr>())
            .collect();
        SODEField::from_forces(&self.chart, forces).expect("n forces on TQ")
    }

    /// `ξ^H = w^i ∂/∂q^i − Γ^i_j w^j ∂/∂v^i`.
    pub fn horizontal_lift(&self, w: &[Expr]) -> Result<VectorFieldAlongMap, DynamicsError> {
        let mut comps = w.to_vec();
        comps.extend(self.coeffs.iter().map(|row| -row.iter().zip(w).map(|(g, x)| g * x).sum::<Expr>()));
        Ok(VectorFieldAlongMap::on(self.chart.tq(), comps)?)
    }

    fn compiled(&self) -> Result<CompiledVec, DynamicsError> {
        let flat: Vec<Expr> = self.coeffs.iter().flatten().cloned().collect();
        Ok(CompiledVec::new(&flat, self.chart.tq().coords())?)
    }

    fn compiled_guard(&self) -> Result<Option<CompiledVec>, DynamicsError> {
        match &self.guard {
            None => Ok(None),
            Some(g) => Ok(Some(CompiledVec::new(std::slice::from_ref(g), self.chart.tq().coords())?)),
        }
    }
}

/// `DX/Dt = dη^i/dt + Γ^i_j(σ, σ̇) η^j` for a field `η(t)` along a curve
/// `σ(t)`, both given by expressions in the parameter `t`.
pub fn covariant_derivative(
    eta: &[Expr],
    sigma: &[Expr],
    conn: &Connection,
    t: &str,
) -> Result<Vec<Expr>, DynamicsError> {
    let c = conn.chart();
    let n = c.dim();
    if eta.len() != n || sigma.len() != n {
        return Err(GeometryError::ComponentCount { expected: n, found: eta.len().min(sigma.len()) }.into());
    }
    let mut lift: BTreeMap<String, Expr> = BTreeMap::new();
    for i in 0..n {
        lift.insert(c.q_names()[i].clone(), sigma[i].clone());
        lift.insert(c.v_names()[i].clone(), sigma[i].diff(t));
    }
    Ok((0..n)
        .map(|i| {
            let transport: Expr =
                conn.coefficients()[i].iter().zip(eta).map(|(g, e)| g.substitute(&lift) * e).sum();
            eta[i].diff(t) + transport
        })
        .collect())
}

fn transport_rhs(gm: &[f64], eta: &[f64], out: &mut [f64]) {
    let n = eta.len();
    for i in 0..n {
        out[i] = -(0..n).map(|j| gm[i * n + j] * eta[j]).sum::<f64>();
    }
}

fn rk4_linear(g0: &[f64], gm: &[f64], g1: &[f64], eta: &[f64], h: f64) -> Vec<f64> {
    let n = eta.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    transport_rhs(g0, eta, &mut k1);
    let tmp: Vec<f64> = (0..n).map(|i| eta[i] + 0.5 * h * k1[i]).collect();
    transport_rhs(gm, &tmp, &mut k2);
    let tmp: Vec<f64> = (0..n).map(|i| eta[i] + 0.5 * h * k2[i]).collect();
    transport_rhs(gm, &tmp, &mut k3);
    let tmp: Vec<f64> = (0..n).map(|i| eta[i] + h * k3[i]).collect();
    transport_rhs(g1, &tmp, &mut k4);
    (0..n).map(|i| eta[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
}

/// Transport `x0` along a lifted curve `(σ, σ̇)` sampled on the tangent
/// chart, solving `dη^i/dt = −Γ^i_j(σ̇) η^j`. Pairs of samples form one RK4
/// step whose midpoint is the shared sample; a leftover single interval
/// uses the cubic Hermite midpoint.
pub fn parallel_transport(conn: &Connection, curve: &NumericCurve, x0: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let n = conn.chart().dim();
    if x0.len() != n {
        return Err(DynamicsError::StateSize { expected: n, found: x0.len() });
    }
    if let Some(s) = curve.states.iter().find(|s| s.len() != 2 * n) {
        return Err(DynamicsError::StateSize { expected: 2 * n, found: s.len() });
    }
    let cg = conn.compiled()?;
    let gamma: Vec<Vec<f64>> = curve.states.iter().map(|s| cg.eval(s)).collect::<Result<_, _>>()?;
    let mut eta = x0.to_vec();
    let mut k = 0;
    let last = curve.len() - 1;
    while k + 2 <= last {
        let h = curve.times[k + 2] - curve.times[k];
        eta = rk4_linear(&gamma[k], &gamma[k + 1], &gamma[k + 2], &eta, h);
        if norm(&eta) > BLOWUP_NORM {
            return Err(DynamicsError::IntegrationBlowup { t: curve.times[k + 2] });
        }
        k += 2;
    }
    if k < last {
        let h = curve.times[last] - curve.times[k];
        let (a, b) = (&curve.states[k], &curve.states[last]);
        let mut mid = vec![0.0; 2 * n];
        for i in 0..n {
            let (q0, q1, v0, v1) = (a[i], b[i], a[n + i], b[n + i]);
            mid[i] = 0.5 * (q0 + q1) + h / 8.0 * (v0 - v1);
            mid[n + i] = 1.5 * (q1 - q0) / h - 0.25 * (v0 + v1);
        }
        let gm = cg.eval(&mid)?;
        eta = rk4_linear(&gamma[k], &gm, &gamma[last], &eta, h);
    }
    Ok(eta)
}

/// Integrate `σ̈^i + Γ^i_j(σ̇) σ̇^j = 0` numerically from `(x0, v0)`.
pub fn geodesic(conn: &Connection, x0: &[f64], v0: &[f64], t_end: f64, h: f64) -> Result<NumericCurve, DynamicsError> {
    let n = conn.chart().dim();
    if x0.len() != n || v0.len() != n {
        return Err(DynamicsError::StateSize { expected: n, found: x0.len().min(v0.len()) });
    }
    let (steps_n, h) = steps(t_end, h)?;
    let cg = conn.compiled()?;
    let guard = conn.compiled_guard()?;
    // A sign change of the guard also means the singular set was crossed.
    let mut last_sign: Option<bool> = None;
    let mut check_guard = move |s: &[f64], t: f64| -> Result<(), DynamicsError> {
        if let Some(g) = &guard {
            let x = g.eval(s)?[0];
            let sign = x > 0.0;
            if x.abs() < GUARD_TOL || last_sign.is_some_and(|l| l != sign) {
                return Err(DynamicsError::ChartSingularity { t });
            }
            last_sign = Some(sign);
        }
        Ok(())
    };
    let mut gm = vec![0.0; n * n];
    let mut f = |t: f64, s: &[f64], out: &mut [f64]| -> Result<(), DynamicsError> {
        check_guard(s, t)?;
        cg.eval_into(s, &mut gm)?;
        for i in 0..n {
            out[i] = s[n + i];
            out[n + i] = -(0..n).map(|j| gm[i * n + j] * s[n + j]).sum::<f64>();
        }
        Ok(())
    };
    let mut s0 = x0.to_vec();
    s0.extend_from_slice(v0);
    let curve = rk4(&mut f, 0.0, &s0, h, steps_n, conn.chart().tq().coords().to_vec())?;
    check_guard(curve.last(), t_end)?;
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;
    use std::f64::consts::PI;

    fn sphere() -> Connection {
        let c = TangentChart::with_velocities(&["th", "ph"], &["v_th", "v_ph"]).unwrap();
        let z = Expr::zero();
        let chr = vec![
            vec![vec![z.clone(), z.clone()], vec![z.clone(), ex("-sin(th)*cos(th)")]],
            vec![vec![z.clone(), ex("cos(th)/sin(th)")], vec![ex("cos(th)/sin(th)"), z]],
        ];
        Connection::linear(&c, chr).unwrap().with_guard(ex("sin(th)"))
    }

    #[test]
    fn sphere_coefficients() {
        let s = sphere();
        assert_eq!(s.coefficients()[0][1], ex("-sin(th)*cos(th)*v_ph"));
        assert_eq!(s.coefficients()[1][1], ex("cos(th)*sin(th)^(-1)*v_th"));
    }

    #[test]
    fn equator_is_geodesic() {
        let s = sphere();
        let d = covariant_derivative(&[ex("0"), ex("1")], &[ex("th0"), ex("t")], &s, "t").unwrap();
        let d = d.iter().map(|e| e.subs("th0", &Expr::float(PI / 2.0))).collect::<Vec<_>>();
        assert!(d.iter().all(|e| e.as_f64().is_some_and(|x| x.abs() < 1e-15)));
        let curve = geodesic(&s, &[PI / 2.0, 0.0], &[0.0, 1.0], 5.0, 1e-3).unwrap();
        assert!(curve.states.iter().all(|st| (st[0] - PI / 2.0).abs() < 1e-7));
    }

    #[test]
    fn flat_transport_is_trivial() {
        let c = TangentChart::new(&["x", "y"]).unwrap();
        let flat = Connection::flat(&c);
        let curve = geodesic(&flat, &[0.0, 0.0], &[1.0, 2.0], 1.0, 1e-3).unwrap();
        assert!((curve.last()[1] - 2.0).abs() < 1e-10);
        let eta = parallel_transport(&flat, &curve, &[0.3, -0.7]).unwrap();
        assert_eq!(eta, vec![0.3, -0.7]);
    }

    #[test]
    fn guard_trips_at_pole() {
        let s = sphere();
        let r = geodesic(&s, &[0.5, 0.0], &[-1.0, 0.0], 2.0, 1e-3);
        assert!(matches!(r, Err(DynamicsError::ChartSingularity { .. }) | Err(DynamicsError::IntegrationBlowup { .. })));
    }
}

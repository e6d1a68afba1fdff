//! Fixed-step RK4 integration of second-order fields, connections,
//! parallel transport, geodesics, and integral curves along projections.

mod connection;
mod control;

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::symcore::{CompiledVec, EvalError};
use crate::tangentgeo::SODEField;

pub use connection::{covariant_derivative, geodesic, parallel_transport, Connection};
pub use control::{integral_curve_along_map, ControlSignal, IntegralCurve};

/// States whose Euclidean norm exceeds this abort the integration.
pub const BLOWUP_NORM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("integration blew up at t = {t}")]
    IntegrationBlowup { t: f64 },
    #[error("chart singularity reached at t = {t}")]
    ChartSingularity { t: f64 },
    #[error("step and horizon must be positive (h = {h}, T = {t})")]
    InvalidStep { h: f64, t: f64 },
    #[error("state has {found} components, expected {expected}")]
    StateSize { expected: usize, found: usize },
    #[error("map is not a projection onto the leading coordinates: {0}")]
    NotAProjectionSplit(String),
    #[error("invalid control signal: {0}")]
    InvalidSignal(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A sampled curve in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericCurve {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub h: f64,
}

impl NumericCurve {
    /// Sample a closed-form curve at `ceil(T/h)` uniform steps.
    pub fn sample(names: Vec<String>, t_end: f64, h: f64, f: impl Fn(f64) -> Vec<f64>) -> Result<Self, DynamicsError> {
        let (n, h) = steps(t_end, h)?;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
        let states = times.iter().map(|&t| f(t)).collect();
        Ok(NumericCurve { names, times, states, h })
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("curves are never empty")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,<names>` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (t, s) in self.times.iter().zip(&self.states) {
            let _ = write!(out, "{t:.16e}");
            for x in s {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// Number of steps and the uniform step size covering `[0, T]`.
pub(crate) fn steps(t_end: f64, h: f64) -> Result<(usize, f64), DynamicsError> {
    if !(h > 0.0 && t_end > 0.0 && h.is_finite() && t_end.is_finite()) {
        return Err(DynamicsError::InvalidStep { h, t: t_end });
    }
    let n = ((t_end / h) - 1e-9).ceil().max(1.0) as usize;
    Ok((n, t_end / n as f64))
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// One classical Runge-Kutta step of `x' = f(t, x)`.
pub fn rk4_step<F>(f: &mut F, t: f64, x: &[f64], h: f64) -> Result<Vec<f64>, DynamicsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), DynamicsError>,
{
    let n = x.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    f(t, x, &mut k1)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    f(t + 0.5 * h, &tmp, &mut k2)?;
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    f(t + 0.5 * h, &tmp, &mut k3)?;
    for i in 0..n {
        tmp[i] = x[i] + h * k3[i];
    }
    f(t + h, &tmp, &mut k4)?;
    Ok((0..n).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
}

/// Integrate `x' = f(t, x)` from `t0` for `n` steps of size `h`.
pub(crate) fn rk4<F>(
    f: &mut F,
    t0: f64,
    x0: &[f64],
    h: f64,
    n: usize,
    names: Vec<String>,
) -> Result<NumericCurve, DynamicsError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), DynamicsError>,
{
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(x0.to_vec());
    let mut x = x0.to_vec();
    for k in 0..n {
        let t = t0 + k as f64 * h;
        x = rk4_step(f, t, &x, h)?;
        let t1 = t0 + (k + 1) as f64 * h;
        if !x.iter().all(|v| v.is_finite()) || norm(&x) > BLOWUP_NORM {
            return Err(DynamicsError::IntegrationBlowup { t: t1 });
        }
        times.push(t1);
        states.push(x.clone());
    }
    Ok(NumericCurve { names, times, states, h })
}

/// Integrate a second-order field from `x0 = (q, v)` over `[0, T]` with
/// step `T / ceil(T/h)`.
pub fn integrate_sode(gamma: &SODEField, x0: &[f64], t_end: f64, h: f64) -> Result<NumericCurve, DynamicsError> {
    let names = gamma.chart().tq().coords().to_vec();
    if x0.len() != names.len() {
        return Err(DynamicsError::StateSize { expected: names.len(), found: x0.len() });
    }
    let (n, h) = steps(t_end, h)?;
    let rhs = CompiledVec::new(gamma.field().components(), &names)?;
    let mut f = |_t: f64, x: &[f64], out: &mut [f64]| rhs.eval_into(x, out).map_err(DynamicsError::from);
    rk4(&mut f, 0.0, x0, h, n, names)
}

/// `Ψ(q, v, q̇, v̇) = (q, q̇, v, v̇)` on a state of `TTQ` in blocks of `n`.
pub fn canonical_involution(state: &[f64]) -> Vec<f64> {
    assert!(state.len().is_multiple_of(4), "state of TTQ has 4n components");
    let n = state.len() / 4;
    let mut out = state.to_vec();
    out[n..2 * n].copy_from_slice(&state[2 * n..3 * n]);
    out[2 * n..3 * n].copy_from_slice(&state[n..2 * n]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;
    use crate::tangentgeo::TangentChart;

    fn oscillator() -> SODEField {
        let c = TangentChart::new(&["q"]).unwrap();
        SODEField::from_forces(&c, vec![ex("-q")]).unwrap()
    }

    #[test]
    fn free_particle_is_exact() {
        let c = TangentChart::new(&["q"]).unwrap();
        let g = SODEField::from_forces(&c, vec![ex("0")]).unwrap();
        let curve = integrate_sode(&g, &[0.0, 1.0], 1.0, 1e-3).unwrap();
        assert!((curve.last()[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillator_period() {
        let curve = integrate_sode(&oscillator(), &[1.0, 0.0], 2.0 * std::f64::consts::PI, 1e-3).unwrap();
        let end = curve.last();
        assert!((end[0] - 1.0).abs() < 1e-8 && end[1].abs() < 1e-8);
    }

    #[test]
    fn blowup_detected() {
        let c = TangentChart::new(&["q"]).unwrap();
        let g = SODEField::from_forces(&c, vec![ex("v^2")]).unwrap();
        let r = integrate_sode(&g, &[0.0, 1.0], 2.0, 1e-3);
        assert!(matches!(r, Err(DynamicsError::IntegrationBlowup { .. })));
    }

    #[test]
    fn involution() {
        assert_eq!(canonical_involution(&[1.0, 2.0, 3.0, 4.0]), vec![1.0, 3.0, 2.0, 4.0]);
        let s = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(canonical_involution(&s), vec![1.0, 2.0, 5.0, 6.0, 3.0, 4.0, 7.0, 8.0]);
        assert_eq!(canonical_involution(&canonical_involution(&s)), s.to_vec());
    }

    #[test]
    fn csv_format() {
        let curve = NumericCurve::sample(vec!["x".into()], 1.0, 0.5, |t| vec![2.0 * t]).unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("t,x\n0.0000000000000000e0,0.0000000000000000e0\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}

use std::fmt::Write as _;

use crate::geometry::VectorFieldAlongMap;
use crate::symcore::CompiledVec;

use super::{rk4, steps, DynamicsError, NumericCurve};

/// Piecewise-constant control values on consecutive intervals from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pieces: Vec<(f64, f64, Vec<f64>)>,
}

impl ControlSignal {
    pub fn new(pieces: Vec<(f64, f64, Vec<f64>)>) -> Result<ControlSignal, DynamicsError> {
        let Some(first) = pieces.first() else {
            return Err(DynamicsError::InvalidSignal("no intervals".into()));
        };
        let m = first.2.len();
        let mut t = 0.0;
        for (a, b, u) in &pieces {
            if (a - t).abs() > 1e-12 {
                return Err(DynamicsError::InvalidSignal(format!("gap or overlap at t = {t}")));
            }
            if b <= a {
                return Err(DynamicsError::InvalidSignal(format!("empty interval [{a}, {b}]")));
            }
            if u.len() != m {
                return Err(DynamicsError::InvalidSignal("inconsistent control dimension".into()));
            }
            t = *b;
        }
        Ok(ControlSignal { pieces })
    }

    /// Consecutive pieces of the given durations starting at 0.
    pub fn from_durations(pieces: Vec<(f64, Vec<f64>)>) -> Result<ControlSignal, DynamicsError> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(pieces.len());
        for (d, u) in pieces {
            out.push((t, t + d, u));
            t += d;
        }
        ControlSignal::new(out)
    }

    pub fn pieces(&self) -> &[(f64, f64, Vec<f64>)] {
        &self.pieces
    }

    pub fn end(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.1)
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].2.len()
    }

    /// CSV with header `t_start,t_end,u1..um`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_start,t_end");
        for k in 1..=self.dim() {
            let _ = write!(out, ",u{k}");
        }
        out.push('\n');
        for (a, b, u) in &self.pieces {
            let _ = write!(out, "{a:.16e},{b:.16e}");
            for x in u {
                let _ = write!(out, ",{x:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// An integral curve together with the largest defect of `(π∘γ)˙ = X∘γ`
/// at interval midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralCurve {
    pub curve: NumericCurve,
    pub residual: f64,
}

/// Integral curve of `X` along a trivial projection `π: (x, u) ↦ x` for a
/// given fibre signal `u(t)`: RK4 on `ẋ = X(x, u)`, restarting at each
/// switch time. States are recorded as `(x, u)`.
pub fn integral_curve_along_map(
    x: &VectorFieldAlongMap,
    signal: &ControlSignal,
    x0: &[f64],
    h: f64,
) -> Result<IntegralCurve, DynamicsError> {
    let base = x.base();
    let (src, tgt) = (base.source(), base.target());
    let n = tgt.dim();
    if src.dim() < n || src.coords()[..n] != *tgt.coords() || base.components() != tgt.coord_exprs().as_slice() {
        return Err(DynamicsError::NotAProjectionSplit(format!("{} -> {}", src.name(), tgt.name())));
    }
    let m = src.dim() - n;
    if signal.dim() != m {
        return Err(DynamicsError::StateSize { expected: m, found: signal.dim() });
    }
    if x0.len() != n {
        return Err(DynamicsError::StateSize { expected: n, found: x0.len() });
    }
    let rhs = CompiledVec::new(x.components(), src.coords())?;
    let mut times = vec![0.0];
    let mut states: Vec<Vec<f64>> = Vec::new();
    let mut state: Vec<f64> = x0.to_vec();
    let mut residual: f64 = 0.0;
    let mut buf = vec![0.0; n + m];
    let mut eval_x = |xs: &[f64], u: &[f64], out: &mut [f64]| -> Result<(), DynamicsError> {
        buf[..n].copy_from_slice(xs);
        buf[n..].copy_from_slice(u);
        rhs.eval_into(&buf, out).map_err(DynamicsError::from)
    };
    for (k, (a, b, u)) in signal.pieces().iter().enumerate() {
        if k == 0 {
            states.push(state.iter().chain(u).copied().collect());
        }
        let (steps_n, hk) = steps(b - a, h)?;
        let mut f = |_t: f64, xs: &[f64], out: &mut [f64]| eval_x(xs, u, out);
        let seg = rk4(&mut f, *a, &state, hk, steps_n, Vec::new())?;
        let mut d = vec![0.0; n];
        for w in seg.states.windows(2) {
            let mid: Vec<f64> = w[0].iter().zip(&w[1]).map(|(p, q)| 0.5 * (p + q)).collect();
            eval_x(&mid, u, &mut d)?;
            for i in 0..n {
                residual = residual.max(((w[1][i] - w[0][i]) / hk - d[i]).abs());
            }
        }
        for (t, s) in seg.times.iter().zip(&seg.states).skip(1) {
            times.push(*t);
            states.push(s.iter().chain(u).copied().collect());
        }
        state = seg.last().to_vec();
    }
    let names = src.coords().to_vec();
    Ok(IntegralCurve { curve: NumericCurve { names, times, states, h }, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Chart, SmoothMap};
    use crate::symcore::ex;

    fn along(coords: &[&str], fibre: &[&str], comps: &[&str]) -> VectorFieldAlongMap {
        let m = Chart::new("M", coords.iter().copied()).unwrap();
        let b = Chart::new("B", coords.iter().chain(fibre).copied()).unwrap();
        let pi = SmoothMap::new(b, m.clone(), m.coord_exprs()).unwrap();
        VectorFieldAlongMap::new(pi, comps.iter().map(|s| ex(s)).collect()).unwrap()
    }

    #[test]
    fn constant_control() {
        let x = along(&["x"], &["u"], &["u"]);
        let sig = ControlSignal::from_durations(vec![(1.0, vec![1.0])]).unwrap();
        let c = integral_curve_along_map(&x, &sig, &[0.0], 1e-3).unwrap();
        assert!((c.curve.last()[0] - 1.0).abs() < 1e-10);
        assert!(c.residual < 1e-6);
    }

    #[test]
    fn heisenberg_composition() {
        let x = along(&["x", "y", "z"], &["u1", "u2"], &["u1", "u2", "x*u2"]);
        let sig = ControlSignal::from_durations(vec![(1.0, vec![1.0, 0.0]), (1.0, vec![0.0, 1.0])]).unwrap();
        let c = integral_curve_along_map(&x, &sig, &[0.0, 0.0, 0.0], 1e-3).unwrap();
        let end = c.curve.last();
        assert!((end[0] - 1.0).abs() < 1e-8 && (end[1] - 1.0).abs() < 1e-8 && (end[2] - 1.0).abs() < 1e-8);
        assert_eq!(c.curve.names, vec!["x", "y", "z", "u1", "u2"]);
    }

    #[test]
    fn signals_must_partition() {
        assert!(ControlSignal::new(vec![(0.0, 1.0, vec![1.0]), (1.5, 2.0, vec![0.0])]).is_err());
        let s = ControlSignal::from_durations(vec![(0.5, vec![1.0, 2.0])]).unwrap();
        assert!(s.to_csv().starts_with("t_start,t_end,u1,u2\n"));
    }

    #[test]
    fn projection_required() {
        let m = Chart::new("M", ["x"]).unwrap();
        let b = Chart::new("B", ["x", "u"]).unwrap();
        let phi = SmoothMap::new(b, m, vec![ex("x + u")]).unwrap();
        let x = VectorFieldAlongMap::new(phi, vec![ex("u")]).unwrap();
        let sig = ControlSignal::from_durations(vec![(1.0, vec![1.0])]).unwrap();
        assert!(matches!(integral_curve_along_map(&x, &sig, &[0.0], 1e-3), Err(DynamicsError::NotAProjectionSplit(_))));
    }
}

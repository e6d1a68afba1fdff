//! Symmetries and constants of motion: the generic-SODE criterion for
//! fields on `TQ`, the prolongation criterion for fields along `τ`, and the
//! converse construction from a first integral.

mod integrate;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::dynamics::{integrate_sode, DynamicsError};
use crate::geometry::{act, contract, lie_derivative, push_forward, GeometryError, VectorFieldAlongMap};
use crate::lagrangian::{LagrangianError, LagrangianSystem};
use crate::symcore::{
    is_zero, max_abs, Compiled, Expr, LinearError, LinearSystem, Sampler, CHECK_POINTS,
};
use crate::tangentgeo::{newtonoid_project, prolong, total_derivative_t1, SODEField, SODESection, TangentError};

pub use integrate::{antiderivative, derive_f};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoetherError {
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error("`{0}` is not a constant of motion")]
    NotAConstant(String),
    #[error("cannot integrate `{0}` term by term")]
    CannotIntegrate(String),
    #[error("reconstructed symmetry fails the prolongation criterion")]
    RoundTripFailed,
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

impl From<TangentError> for NoetherError {
    fn from(e: TangentError) -> Self {
        NoetherError::Lagrangian(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Symmetry,
    NotSymmetry,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Symmetry => "symmetry",
            Verdict::NotSymmetry => "not_symmetry",
        })
    }
}

/// A field (on `TQ` or along `τ`) with a gauge function.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCandidate {
    pub x: VectorFieldAlongMap,
    pub f: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoetherResult {
    pub verdict: Verdict,
    pub f: Expr,
    /// The constant of motion; meaningful when the verdict is a symmetry.
    pub g: Expr,
    /// Largest absolute values of the named checks over random points.
    pub residuals: BTreeMap<String, f64>,
}

impl NoetherResult {
    pub fn is_symmetry(&self) -> bool {
        self.verdict == Verdict::Symmetry
    }
}

/// Split `e`, affine in `unknowns`, into its coefficients and free part;
/// returns the parts that do not vanish with their residuals.
fn affine_mismatch(
    e: &Expr,
    unknowns: &[Expr],
    labels: &[String],
    residuals: &mut BTreeMap<String, f64>,
    sampler: &mut Sampler,
) -> bool {
    let mut zero_map = BTreeMap::new();
    for u in unknowns {
        zero_map.insert(u.as_symbol().expect("symbol").to_string(), Expr::zero());
    }
    let mut parts: Vec<(String, Expr)> = unknowns
        .iter()
        .zip(labels)
        .map(|(u, l)| (format!("coefficient_{l}"), e.diff(u.as_symbol().expect("symbol"))))
        .collect();
    parts.push(("free_part".to_string(), e.substitute(&zero_map)));
    let mut ok = true;
    for (name, p) in parts {
        let r = if p.is_zero() { 0.0 } else { max_abs(&p, sampler, CHECK_POINTS) };
        if !(p.is_zero() || is_zero(&p, sampler)) {
            ok = false;
        }
        residuals.insert(name, r);
    }
    ok
}

fn field_size(x: &VectorFieldAlongMap, sampler: &mut Sampler) -> f64 {
    x.components().iter().map(|c| max_abs(c, sampler, CHECK_POINTS)).fold(0.0, f64::max)
}

/// Criterion for `X` on `TQ`: `L_{X(D)} L = L_D F` for every second-order
/// field `D`, tested with symbolic forces. On success
/// `G = i_X θ_L − F`.
pub fn check_thm1(
    sys: &LagrangianSystem,
    x: &VectorFieldAlongMap,
    f: &Expr,
    sampler: &mut Sampler,
) -> Result<NoetherResult, NoetherError> {
    sys.require_regular()?;
    let tc = sys.chart();
    let n = tc.dim();
    let ds: Vec<Expr> = (0..n).map(|i| Expr::sym(&format!("__d{i}"))).collect();
    let mut dcomps = tc.velocities();
    dcomps.extend(ds.iter().cloned());
    let d = VectorFieldAlongMap::on(tc.tq(), dcomps)?;
    let xd = newtonoid_project(tc, x, &d)?;
    let cond = act(&xd, sys.lagrangian()) - act(&d, f);
    let mut residuals = BTreeMap::new();
    let ok = affine_mismatch(&cond, &ds, tc.v_names(), &mut residuals, sampler);
    let g = contract(x, sys.theta())?.as_scalar().expect("scalar") - f;
    if !ok {
        return Ok(NoetherResult { verdict: Verdict::NotSymmetry, f: f.clone(), g, residuals });
    }
    let gamma = sys.dynamics(sampler)?;
    let xg = newtonoid_project(tc, x, gamma.field())?;
    let lie = lie_derivative(&xg, sys.omega())?;
    let lie_size = lie.terms().map(|(_, c)| max_abs(c, sampler, CHECK_POINTS)).fold(0.0, f64::max);
    residuals.insert("lie_omega".into(), lie_size);
    residuals.insert("energy_variation".into(), max_abs(&act(&xg, sys.energy()), sampler, CHECK_POINTS));
    residuals.insert("conservation".into(), max_abs(&act(gamma.field(), &g), sampler, CHECK_POINTS));
    Ok(NoetherResult { verdict: Verdict::Symmetry, f: f.clone(), g, residuals })
}

/// Criterion for `X` along `τ`: `X^(1) L = T^(1) F`, both affine in the
/// accelerations. On success `G = F − θ̂_L(X)`.
pub fn check_thm2(
    sys: &LagrangianSystem,
    x: &VectorFieldAlongMap,
    f: &Expr,
    sampler: &mut Sampler,
) -> Result<NoetherResult, NoetherError> {
    sys.require_regular()?;
    let tc = sys.chart();
    let x = if x.base() == tc.tau() { x.clone() } else { crate::geometry::restrict(x, tc.tau())? };
    let x1 = prolong(tc, &x)?;
    let cond = act(&x1, sys.lagrangian()) - act(&total_derivative_t1(tc), f);
    let mut residuals = BTreeMap::new();
    let ok = affine_mismatch(&cond, &tc.accelerations(), tc.a_names(), &mut residuals, sampler);
    let g = f - sys.legendre().theta_hat.pair(&x)?;
    if !ok {
        return Ok(NoetherResult { verdict: Verdict::NotSymmetry, f: f.clone(), g, residuals });
    }
    let gamma = sys.dynamics(sampler)?;
    residuals.insert("conservation".into(), max_abs(&act(gamma.field(), &g), sampler, CHECK_POINTS));
    // X^(1) ∘ γ against the Newtonoid projection of any field over X.
    let section = SODESection::new(tc, gamma.forces().to_vec())?;
    let composed: Vec<Expr> = x1.components().iter().map(|c| section.pull(c)).collect();
    let mut lifted = x.components().to_vec();
    lifted.extend(std::iter::repeat_n(Expr::zero(), tc.dim()));
    let projected = newtonoid_project(tc, &VectorFieldAlongMap::on(tc.tq(), lifted)?, gamma.field())?;
    let composed = VectorFieldAlongMap::on(tc.tq(), composed)?;
    residuals.insert("newtonoid_correspondence".into(), field_size(&composed.sub(&projected)?, sampler));
    Ok(NoetherResult { verdict: Verdict::Symmetry, f: f.clone(), g, residuals })
}

/// The symmetry along `τ` and gauge term whose constant is `G`. Solves
/// `i_X̃ ω_L = −dG`, projects `X = Tτ ∘ X̃`, sets `F = G + θ̂_L(X)` and
/// confirms the pair with [`check_thm2`].
pub fn symmetry_from_constant(
    sys: &LagrangianSystem,
    g: &Expr,
    sampler: &mut Sampler,
) -> Result<SymmetryCandidate, NoetherError> {
    sys.require_regular()?;
    let tc = sys.chart();
    let gamma = sys.dynamics(sampler)?;
    if !is_zero(&act(gamma.field(), g), sampler) {
        return Err(NoetherError::NotAConstant(g.to_string()));
    }
    let unknowns: Vec<String> = (0..2 * tc.dim()).map(|i| format!("__s{i}")).collect();
    let dg = crate::geometry::exterior_derivative(&crate::geometry::FormAlongMap::scalar(
        crate::geometry::SmoothMap::identity(tc.tq()),
        g.clone(),
    ))?;
    let eqs = sys.contraction_equations(&unknowns, &dg.neg())?;
    let sol = crate::symcore::solve_linear(&LinearSystem::new(unknowns.clone(), eqs)?, sampler)?;
    if !sol.free.is_empty() || !sol.conditions.is_empty() {
        return Err(NoetherError::Lagrangian(LagrangianError::SingularLagrangian(sys.regularity())));
    }
    let xt = VectorFieldAlongMap::on(tc.tq(), unknowns.iter().map(|u| sol.value(u)).collect())?;
    let x = push_forward(tc.tau(), &xt)?;
    let f = g + sys.legendre().theta_hat.pair(&x)?;
    let check = check_thm2(sys, &x, &f, sampler)?;
    if !check.is_symmetry() {
        return Err(NoetherError::RoundTripFailed);
    }
    Ok(SymmetryCandidate { x, f })
}

/// The along-`τ` reading of a symmetry `X̄` on `TQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConventionRelation {
    /// `X = Tτ ∘ X̄`.
    pub x: VectorFieldAlongMap,
    pub f: Expr,
    /// `F − θ̂_L(X)`.
    pub g: Expr,
    /// Whether `G_TQ + G_τ` is constant, as the opposite signs predict.
    pub sum_constant: bool,
}

/// Project a symmetry on `TQ` with constant `g_tq` to a field along `τ`,
/// derive its gauge and compare the two constants. `None` when the gauge
/// cannot be integrated or the projection is not a symmetry.
pub fn relate_conventions(
    sys: &LagrangianSystem,
    x_tq: &VectorFieldAlongMap,
    g_tq: &Expr,
    sampler: &mut Sampler,
) -> Result<Option<ConventionRelation>, NoetherError> {
    let tc = sys.chart();
    let x = push_forward(tc.tau(), x_tq)?;
    let f = match derive_f(sys, &x, sampler) {
        Ok(f) => f,
        Err(NoetherError::CannotIntegrate(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let r = check_thm2(sys, &x, &f, sampler)?;
    if !r.is_symmetry() {
        return Ok(None);
    }
    let sum = g_tq + &r.g;
    let sum_constant = tc.tq().coords().iter().all(|z| is_zero(&sum.diff(z), sampler));
    Ok(Some(ConventionRelation { x, f, g: r.g, sum_constant }))
}

/// Integration horizon and step for numeric conservation checks.
pub const DRIFT_HORIZON: f64 = 10.0;
pub const DRIFT_STEP: f64 = 1e-3;

/// Largest `|G(t) − G(0)|` over RK4 trajectories of the dynamics from
/// random initial points.
pub fn verify_numeric(
    sys: &LagrangianSystem,
    g: &Expr,
    n_trajectories: usize,
    sampler: &mut Sampler,
) -> Result<f64, NoetherError> {
    let gamma: SODEField = sys.dynamics(sampler)?;
    let names = sys.chart().tq().coords().to_vec();
    let gc = Compiled::new(g, &names).map_err(DynamicsError::from)?;
    let mut worst: f64 = 0.0;
    for _ in 0..n_trajectories {
        let x0: Vec<f64> = names.iter().map(|_| sampler.coordinate()).collect();
        let curve = integrate_sode(&gamma, &x0, DRIFT_HORIZON, DRIFT_STEP)?;
        let g0 = gc.eval(&curve.states[0]).map_err(DynamicsError::from)?;
        for s in &curve.states {
            let gt = gc.eval(s).map_err(DynamicsError::from)?;
            worst = worst.max((gt - g0).abs());
        }
    }
    Ok(worst)
}

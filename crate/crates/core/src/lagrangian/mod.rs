//! Cartan forms, energy, regularity, Euler-Lagrange dynamics, Legendre map
//! and the evolution operator `K_L` of a Lagrangian on `TQ`.

use std::fmt;

use thiserror::Error;

use crate::geometry::{
    act, contract, exterior_derivative, pullback, push_forward, FormAlongMap, GeometryError, SmoothMap,
    VectorFieldAlongMap,
};
use crate::symcore::{
    classify, is_zero, max_abs, Expr, LinearError, LinearSystem, Sampler, ZeroTest, CHECK_POINTS, ZERO_TOL,
};
use crate::tangentgeo::{is_point_transformation, liouville, total_field, SODEField, TangentChart, TangentError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LagrangianError {
    #[error("Lagrangian is not regular (regularity: {0})")]
    SingularLagrangian(Regularity),
    #[error("map is not a point transformation")]
    NotPointTransformation,
    #[error("solution of the dynamical equation is not second order: {0}")]
    NotASODE(String),
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl From<TangentError> for LagrangianError {
    fn from(e: TangentError) -> Self {
        match e {
            TangentError::NotASODE(m) => LagrangianError::NotASODE(m),
            TangentError::Geometry(g) => LagrangianError::Geometry(g),
        }
    }
}

/// Whether the velocity Hessian is invertible, as far as can be certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Yes,
    No,
    Undecided,
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularity::Yes => "yes",
            Regularity::No => "no",
            Regularity::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianSystem {
    chart: TangentChart,
    lagrangian: Expr,
    theta: FormAlongMap,
    omega: FormAlongMap,
    energy: Expr,
    hessian: Vec<Vec<Expr>>,
    hessian_det: Expr,
    regular: Regularity,
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => (0..n)
            .filter(|&j| !m[0][j].is_zero())
            .map(|j| {
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, e)| e.clone()).collect())
                    .collect();
                let t = &m[0][j] * determinant(&minor);
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .sum(),
    }
}

fn fresh_unknowns(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("__{prefix}{i}")).collect()
}

impl LagrangianSystem {
    pub fn build(lagrangian: Expr, chart: &TangentChart, sampler: &mut Sampler) -> Result<Self, LagrangianError> {
        let tq = chart.tq();
        if let Some(s) = lagrangian.symbols().into_iter().find(|s| tq.index_of(s).is_none()) {
            return Err(GeometryError::ForeignSymbol { symbol: s, chart: tq.name().to_string() }.into());
        }
        let n = chart.dim();
        let dl_dv: Vec<Expr> = chart.v_names().iter().map(|v| lagrangian.diff(v)).collect();
        let mut theta_comps = dl_dv.clone();
        theta_comps.extend(std::iter::repeat_n(Expr::zero(), n));
        let theta = FormAlongMap::one_form(SmoothMap::identity(tq), theta_comps)?;
        let omega = exterior_derivative(&theta)?.neg();
        let energy = act(&liouville(chart), &lagrangian) - &lagrangian;
        let hessian: Vec<Vec<Expr>> =
            dl_dv.iter().map(|d| chart.v_names().iter().map(|v| d.diff(v)).collect()).collect();
        let hessian_det = determinant(&hessian);
        let regular = match classify(&hessian_det, sampler) {
            ZeroTest::Zero => Regularity::No,
            ZeroTest::NonZero => Regularity::Yes,
            ZeroTest::Undecided => Regularity::Undecided,
        };
        Ok(LagrangianSystem { chart: chart.clone(), lagrangian, theta, omega, energy, hessian, hessian_det, regular })
    }

    pub fn chart(&self) -> &TangentChart {
        &self.chart
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    /// `θ_L = (∂L/∂v^i) dq^i`.
    pub fn theta(&self) -> &FormAlongMap {
        &self.theta
    }

    /// `ω_L = −dθ_L`.
    pub fn omega(&self) -> &FormAlongMap {
        &self.omega
    }

    /// `E_L = Δ L − L`.
    pub fn energy(&self) -> &Expr {
        &self.energy
    }

    pub fn hessian(&self) -> &[Vec<Expr>] {
        &self.hessian
    }

    pub fn hessian_determinant(&self) -> &Expr {
        &self.hessian_det
    }

    pub fn regularity(&self) -> Regularity {
        self.regular
    }

    pub fn is_regular(&self) -> bool {
        self.regular == Regularity::Yes
    }

    pub(crate) fn require_regular(&self) -> Result<(), LagrangianError> {
        if self.is_regular() {
            Ok(())
        } else {
            Err(LagrangianError::SingularLagrangian(self.regular))
        }
    }

    /// `dE_L` as a 1-form on `TQ`.
    pub fn energy_differential(&self) -> FormAlongMap {
        exterior_derivative(&FormAlongMap::scalar(SmoothMap::identity(self.chart.tq()), self.energy.clone()))
            .expect("on identity")
    }

    /// The equations `i_X ω_L − α = 0` for `X` with symbolic components.
    pub(crate) fn contraction_equations(
        &self,
        unknowns: &[String],
        alpha: &FormAlongMap,
    ) -> Result<Vec<Expr>, LagrangianError> {
        let x = VectorFieldAlongMap::on(self.chart.tq(), unknowns.iter().map(|u| Expr::sym(u)).collect())?;
        let lhs = contract(&x, &self.omega)?;
        let diff = lhs.sub(alpha)?;
        Ok(diff.components().expect("1-form"))
    }

    /// The unique field `Γ` with `i_Γ ω_L = dE_L`, checked to be second
    /// order.
    pub fn dynamics(&self, sampler: &mut Sampler) -> Result<SODEField, LagrangianError> {
        self.require_regular()?;
        let unknowns = fresh_unknowns("g", 2 * self.chart.dim());
        let eqs = self.contraction_equations(&unknowns, &self.energy_differential())?;
        let sol = crate::symcore::solve_linear(&LinearSystem::new(unknowns.clone(), eqs)?, sampler)?;
        if !sol.free.is_empty() || !sol.conditions.is_empty() {
            return Err(LagrangianError::SingularLagrangian(Regularity::No));
        }
        let mut comps: Vec<Expr> = unknowns.iter().map(|u| sol.value(u)).collect();
        for i in 0..self.chart.dim() {
            let v = self.chart.v(i);
            if comps[i] != v {
                if !is_zero(&(&comps[i] - &v), sampler) {
                    return Err(LagrangianError::NotASODE(format!(
                        "position component {} is `{}`",
                        i, comps[i]
                    )));
                }
                comps[i] = v;
            }
        }
        Ok(SODEField::new(&self.chart, VectorFieldAlongMap::on(self.chart.tq(), comps)?)?)
    }

    /// Legendre map and `θ̂_L` along `τ`.
    pub fn legendre(&self) -> LegendreData {
        let dl_dv: Vec<Expr> = self.chart.v_names().iter().map(|v| self.lagrangian.diff(v)).collect();
        let mut comps = self.chart.base().coord_exprs();
        comps.extend(dl_dv.iter().cloned());
        let fl = SmoothMap::new(self.chart.tq().clone(), self.chart.cotangent().clone(), comps)
            .expect("components live on TQ");
        let theta_hat = FormAlongMap::one_form(self.chart.tau().clone(), dl_dv).expect("n components");
        LegendreData { fl, theta_hat }
    }

    /// `K_L = v^i (∂/∂q^i ∘ FL) + (∂L/∂q^i)(∂/∂p_i ∘ FL)`.
    pub fn evolution_operator(&self) -> EvolutionOperator {
        let fl = self.legendre().fl;
        let mut comps = self.chart.velocities();
        comps.extend(self.chart.q_names().iter().map(|q| self.lagrangian.diff(q)));
        EvolutionOperator { field: VectorFieldAlongMap::new(fl, comps).expect("2n components") }
    }

    /// Primary constraints `p_i − ∂L/∂v^i` for the velocities on which
    /// `∂L/∂v^i` does not depend.
    pub fn primary_hamiltonian_constraints(&self) -> Vec<Expr> {
        (0..self.chart.dim())
            .filter(|&i| self.hessian[i].iter().all(Expr::is_zero))
            .map(|i| self.chart.p(i) - self.lagrangian.diff(&self.chart.v_names()[i]))
            .collect()
    }
}

/// `ω₀ = dq^i ∧ dp_i` on `T*Q`.
pub fn canonical_symplectic(chart: &TangentChart) -> FormAlongMap {
    let n = chart.dim();
    let terms = (0..n).map(|i| (vec![i, n + i], Expr::one()));
    FormAlongMap::from_terms(SmoothMap::identity(chart.cotangent()), 2, terms).expect("valid indices")
}

/// `θ₀ = p_i dq^i` on `T*Q`.
pub fn liouville_one_form(chart: &TangentChart) -> FormAlongMap {
    let n = chart.dim();
    let mut comps: Vec<Expr> = (0..n).map(|i| chart.p(i)).collect();
    comps.extend(std::iter::repeat_n(Expr::zero(), n));
    FormAlongMap::one_form(SmoothMap::identity(chart.cotangent()), comps).expect("2n components")
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreData {
    /// `FL: (q, v) ↦ (q, ∂L/∂v)`.
    pub fl: SmoothMap,
    /// `θ̂_L = (∂L/∂v^i)(dq^i ∘ τ)`.
    pub theta_hat: FormAlongMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOperator {
    pub field: VectorFieldAlongMap,
}

/// Residuals of the two equations determining `K_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionCheck {
    /// `i_K ω₀ − dE_L` vanishes after simplification.
    pub symplectic_symbolic: bool,
    pub symplectic_residual: f64,
    /// `Tπ ∘ K` equals `T` after simplification.
    pub projection_symbolic: bool,
    pub projection_residual: f64,
}

impl EvolutionCheck {
    pub fn holds(&self) -> bool {
        self.symplectic_residual <= ZERO_TOL && self.projection_residual <= ZERO_TOL
    }
}

impl EvolutionOperator {
    pub fn verify(&self, sys: &LagrangianSystem, sampler: &mut Sampler) -> Result<EvolutionCheck, LagrangianError> {
        let lhs = contract(&self.field, &canonical_symplectic(sys.chart()))?;
        let d1 = lhs.sub(&sys.energy_differential())?;
        let tpk = push_forward(sys.chart().pi(), &self.field)?;
        let d2 = tpk.sub(&total_field(sys.chart()))?;
        let r1 = d1.terms().map(|(_, c)| max_abs(c, sampler, CHECK_POINTS)).fold(0.0, f64::max);
        let r2 = d2.components().iter().map(|c| max_abs(c, sampler, CHECK_POINTS)).fold(0.0, f64::max);
        Ok(EvolutionCheck {
            symplectic_symbolic: d1.is_structurally_zero(),
            symplectic_residual: r1,
            projection_symbolic: d2.is_structurally_zero(),
            projection_residual: r2,
        })
    }

    /// `K_L ζ` for a function `ζ` on `T*Q`.
    pub fn apply(&self, zeta: &Expr) -> Result<Expr, LagrangianError> {
        let tsq = self.field.target();
        if let Some(s) = zeta.symbols().into_iter().find(|s| tsq.index_of(s).is_none()) {
            return Err(GeometryError::ForeignSymbol { symbol: s, chart: tsq.name().to_string() }.into());
        }
        Ok(act(&self.field, zeta))
    }
}

/// `K_L ζ`: a Hamiltonian-side function turned into a Lagrangian-side one.
pub fn kl_apply(k: &EvolutionOperator, zeta: &Expr) -> Result<Expr, LagrangianError> {
    k.apply(zeta)
}

/// Largest residuals of `Φ*ω_L = ω_{Φ*L}` and `Φ*E_L = E_{Φ*L}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTransformReport {
    pub omega_residual: f64,
    pub energy_residual: f64,
}

pub fn point_transform_check(
    sys: &LagrangianSystem,
    phi: &SmoothMap,
    sampler: &mut Sampler,
) -> Result<PointTransformReport, LagrangianError> {
    if !is_point_transformation(sys.chart(), phi, sampler)? {
        return Err(LagrangianError::NotPointTransformation);
    }
    let pulled = LagrangianSystem::build(phi.pull(sys.lagrangian()), sys.chart(), sampler)?;
    let omega_pb = pullback(phi, sys.omega())?;
    let omega_residual = omega_pb.residual(pulled.omega(), sampler, CHECK_POINTS)?;
    let energy_residual = max_abs(&(phi.pull(sys.energy()) - pulled.energy()), sampler, CHECK_POINTS);
    Ok(PointTransformReport { omega_residual, energy_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::ex;
    use crate::tangentgeo::tangent_lift;

    fn one() -> TangentChart {
        TangentChart::new(&["q"]).unwrap()
    }

    fn xy() -> TangentChart {
        TangentChart::new(&["x", "y"]).unwrap()
    }

    fn build(l: &str, c: &TangentChart) -> LagrangianSystem {
        LagrangianSystem::build(ex(l), c, &mut Sampler::new(0)).unwrap()
    }

    #[test]
    fn free_particle_forms() {
        let c = one();
        let s = build("v^2/2", &c);
        assert_eq!(s.theta().components().unwrap(), vec![ex("v"), ex("0")]);
        assert_eq!(s.omega().coefficient(&[0, 1]), Expr::one());
        assert_eq!(s.energy(), &ex("v^2/2"));
        assert_eq!(s.regularity(), Regularity::Yes);
        assert_eq!(s.dynamics(&mut Sampler::new(1)).unwrap().forces(), &[ex("0")]);
    }

    #[test]
    fn singular_examples() {
        let s = build("v_x^2/2 + x*v_y", &xy());
        assert_eq!(s.regularity(), Regularity::No);
        assert!(matches!(s.dynamics(&mut Sampler::new(1)), Err(LagrangianError::SingularLagrangian(_))));
        assert_eq!(s.primary_hamiltonian_constraints(), vec![ex("p_y - x")]);
        let s = build("v", &one());
        assert!(s.omega().is_structurally_zero());
        assert!(s.energy().is_zero());
    }

    #[test]
    fn oscillator_and_potential() {
        let s = build("(v^2 - q^2)/2", &one());
        assert_eq!(s.dynamics(&mut Sampler::new(1)).unwrap().forces(), &[ex("-q")]);
        let c = TangentChart::with_velocities(&["q1", "q2"], &["v1", "v2"]).unwrap();
        let s = build("(v1^2 + v2^2)/2 - q1^2*q2 - sin(q2)", &c);
        let g = s.dynamics(&mut Sampler::new(1)).unwrap();
        assert_eq!(g.forces(), &[ex("-2*q1*q2"), ex("-q1^2 - cos(q2)")]);
    }

    #[test]
    fn evolution_operator_equations() {
        for (l, c) in [("v^2/2 - q^4", one()), ("v_x^2/2 + x*v_y", xy()), ("(v_x - v_y)^2/2 + x*y", xy())] {
            let s = build(l, &c);
            let k = s.evolution_operator();
            let chk = k.verify(&s, &mut Sampler::new(3)).unwrap();
            assert!(chk.symplectic_symbolic && chk.projection_symbolic, "{l}");
        }
        let s = build("v_x^2/2 + x*v_y", &xy());
        let k = s.evolution_operator();
        assert_eq!(k.field.components(), &[ex("v_x"), ex("v_y"), ex("v_y"), ex("0")]);
        assert_eq!(kl_apply(&k, &ex("p_y - x")).unwrap(), ex("-v_x"));
        assert_eq!(kl_apply(&k, &ex("x")).unwrap(), ex("v_x"));
        assert_eq!(kl_apply(&k, &ex("7")).unwrap(), ex("0"));
    }

    #[test]
    fn legendre_pulls_back_liouville_form() {
        let c = xy();
        let s = build("v_x^2/2 + x*v_y + y^2*v_x*v_y", &c);
        let fl = s.legendre().fl;
        assert_eq!(pullback(&fl, &liouville_one_form(&c)).unwrap(), *s.theta());
    }

    #[test]
    fn point_transformations() {
        let c = one();
        let s = build("v^2/2", &c);
        let mut smp = Sampler::new(9);
        for phi in ["q + 3", "2*q"] {
            let m = SmoothMap::new(c.base().clone(), c.base().clone(), vec![ex(phi)]).unwrap();
            let r = point_transform_check(&s, &tangent_lift(&c, &m).unwrap(), &mut smp).unwrap();
            assert!(r.omega_residual <= 1e-9 && r.energy_residual <= 1e-9);
        }
        let bad = SmoothMap::new(c.tq().clone(), c.tq().clone(), vec![ex("q"), ex("2*v")]).unwrap();
        assert_eq!(point_transform_check(&s, &bad, &mut smp), Err(LagrangianError::NotPointTransformation));
    }
}

//! Constraint algorithm for `i_Γ(φ*ω) = α` with `φ: P → N` of constant
//! rank, and its specialization to singular Lagrangians through `FL`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geometry::{act, contract, exterior_derivative, pullback, FormAlongMap, GeometryError, SmoothMap, VectorFieldAlongMap};
use crate::lagrangian::{canonical_symplectic, kl_apply, LagrangianError, LagrangianSystem};
use crate::symcore::{
    classify, max_abs, normalize, numeric_rank, solve_linear, CompiledVec, EvalError, Expr, LinearError,
    LinearSystem, Sampler, ZeroTest, CHECK_POINTS, ZERO_TOL,
};

pub const DEFAULT_MAX_ITER: usize = 10;
const RANK_POINTS: usize = 10;
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstraintError {
    #[error("2-form is not closed")]
    NotClosed,
    #[error("rank of {0} varies across probe points")]
    RankNotConstant(String),
    #[error("constraint `{0}` cannot be solved for a single coordinate")]
    ReductionFailure(String),
    #[error("max_iter must be at least 1")]
    InvalidIterations,
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
}

/// `φ: P → N`, a closed 2-form `ω` on `N` and a 1-form `α` on `P`.
#[derive(Debug, Clone)]
pub struct PresymplecticProblem {
    phi: SmoothMap,
    omega: FormAlongMap,
    alpha: FormAlongMap,
}

impl PresymplecticProblem {
    pub fn new(
        phi: SmoothMap,
        omega: FormAlongMap,
        alpha: FormAlongMap,
        sampler: &mut Sampler,
    ) -> Result<Self, ConstraintError> {
        let n = SmoothMap::identity(phi.target());
        let p = SmoothMap::identity(phi.source());
        if omega.degree() != 2 || alpha.degree() != 1 {
            return Err(GeometryError::DegreeError(format!(
                "expected a 2-form and a 1-form, got degrees {} and {}",
                omega.degree(),
                alpha.degree()
            ))
            .into());
        }
        if *omega.base() != n {
            return Err(GeometryError::chart_mismatch(phi.target(), omega.source()).into());
        }
        if *alpha.base() != p {
            return Err(GeometryError::chart_mismatch(phi.source(), alpha.source()).into());
        }
        let d = exterior_derivative(&omega)?;
        if !d.is_structurally_zero() && d.residual(&FormAlongMap::zero(n, 3), sampler, CHECK_POINTS)? > ZERO_TOL {
            return Err(ConstraintError::NotClosed);
        }
        Ok(PresymplecticProblem { phi, omega, alpha })
    }

    pub fn phi(&self) -> &SmoothMap {
        &self.phi
    }

    pub fn omega(&self) -> &FormAlongMap {
        &self.omega
    }

    pub fn alpha(&self) -> &FormAlongMap {
        &self.alpha
    }

    pub fn pulled_omega(&self) -> Result<FormAlongMap, ConstraintError> {
        Ok(pullback(&self.phi, &self.omega)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainStatus {
    Stabilized,
    EmptyFinalSet,
    MaxIterations,
}

impl fmt::Display for ChainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainStatus::Stabilized => "stabilized",
            ChainStatus::EmptyFinalSet => "empty_final_set",
            ChainStatus::MaxIterations => "max_iterations",
        })
    }
}

/// Result of the constraint algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintChain {
    pub generations: Vec<Vec<Expr>>,
    pub status: ChainStatus,
    /// Final field with free parameters `mu_k`.
    pub gamma: VectorFieldAlongMap,
    pub parameters: Vec<String>,
    /// Each constraint solved for one coordinate, in discovery order.
    pub solved: Vec<(String, Expr)>,
}

impl ConstraintChain {
    pub fn constraints(&self) -> impl Iterator<Item = &Expr> {
        self.generations.iter().flatten()
    }

    /// Rewrite `e` on the final constraint set.
    pub fn reduce(&self, e: &Expr) -> Expr {
        let map: BTreeMap<String, Expr> = self.solved.iter().cloned().collect();
        e.substitute(&map)
    }
}

/// Triangular description of the current constraint set.
#[derive(Debug, Default)]
struct Reduction {
    map: BTreeMap<String, Expr>,
    order: Vec<(String, Expr)>,
}

impl Reduction {
    fn reduce(&self, e: &Expr) -> Expr {
        if self.map.is_empty() {
            e.clone()
        } else {
            e.substitute(&self.map)
        }
    }

    /// Add `χ = 0`, solving it for the last coordinate in which it is
    /// affine with a constant coefficient.
    fn insert(&mut self, chi: &Expr, coords: &[String]) -> Result<(), ConstraintError> {
        for y in coords.iter().rev() {
            if !chi.contains_symbol(y) {
                continue;
            }
            let c = chi.diff(y);
            if !c.is_constant() || c.is_zero() {
                continue;
            }
            let sol = Expr::sym(y) - chi * c.recip();
            if sol.contains_symbol(y) {
                continue;
            }
            let one: BTreeMap<String, Expr> = [(y.clone(), sol.clone())].into();
            for v in self.map.values_mut() {
                *v = v.substitute(&one);
            }
            for (_, v) in self.order.iter_mut() {
                *v = v.substitute(&one);
            }
            self.map.insert(y.clone(), sol.clone());
            self.order.push((y.clone(), sol));
            return Ok(());
        }
        Err(ConstraintError::ReductionFailure(chi.to_string()))
    }
}

fn float_matrix_ranks(
    entries: &[Vec<Expr>],
    coords: &[String],
    sampler: &mut Sampler,
) -> Result<Vec<usize>, ConstraintError> {
    let cols = entries.first().map_or(0, Vec::len);
    let flat: Vec<Expr> = entries.iter().flatten().cloned().collect();
    let compiled = CompiledVec::new(&flat, coords)?;
    let mut ranks = Vec::with_capacity(RANK_POINTS);
    for _ in 0..RANK_POINTS {
        let x: Vec<f64> = coords.iter().map(|_| sampler.coordinate()).collect();
        let vals = compiled.eval(&x)?;
        let m: Vec<Vec<f64>> = vals.chunks(cols.max(1)).map(<[f64]>::to_vec).collect();
        ranks.push(numeric_rank(&m, RANK_TOL));
    }
    Ok(ranks)
}

/// Numeric rank at `RANK_POINTS` random points, required to be the same
/// everywhere.
fn constant_rank(
    what: &str,
    entries: &[Vec<Expr>],
    coords: &[String],
    sampler: &mut Sampler,
) -> Result<usize, ConstraintError> {
    if entries.is_empty() || entries[0].is_empty() {
        return Ok(0);
    }
    let ranks = float_matrix_ranks(entries, coords, sampler)?;
    if ranks.iter().any(|&r| r != ranks[0]) {
        return Err(ConstraintError::RankNotConstant(what.to_string()));
    }
    Ok(ranks[0])
}

fn agree(what: &str, numeric: usize, symbolic: usize) -> Result<(), ConstraintError> {
    if numeric != symbolic {
        return Err(ConstraintError::RankNotConstant(what.to_string()));
    }
    Ok(())
}

/// Pairings `⟨z, α⟩` for a basis of `{z : Tφ(z) ∈ rad ω}`.
pub fn existence_constraints(
    prob: &PresymplecticProblem,
    sampler: &mut Sampler,
) -> Result<Vec<Expr>, ConstraintError> {
    let src = prob.phi.source();
    let (np, nn) = (src.dim(), prob.phi.target().dim());
    let jac = prob.phi.jacobian();
    let om: Vec<Vec<Expr>> =
        (0..nn).map(|i| (0..nn).map(|j| prob.phi.pull(&prob.omega.coefficient(&[i, j]))).collect()).collect();
    let m: Vec<Vec<Expr>> = (0..nn)
        .map(|i| (0..np).map(|a| (0..nn).map(|j| &om[i][j] * &jac[j][a]).sum::<Expr>().simplify()).collect())
        .collect();
    let unknowns: Vec<String> = (0..np).map(|a| format!("__z{a}")).collect();
    let eqs: Vec<Expr> =
        m.iter().map(|row| row.iter().zip(&unknowns).map(|(c, z)| c * Expr::sym(z)).sum()).collect();
    let what = "Tφ composed with ω";
    let rank = constant_rank(what, &m, src.coords(), sampler)?;
    let sol = solve_linear(&LinearSystem::new(unknowns.clone(), eqs)?, sampler)?;
    agree(what, rank, np - sol.free.len())?;
    let alpha = prob.alpha.components().expect("1-form");
    let mut out = Vec::new();
    for f in &sol.free {
        let pick: BTreeMap<String, Expr> =
            sol.free.iter().map(|g| (g.clone(), if g == f { Expr::one() } else { Expr::zero() })).collect();
        let pairing: Expr = unknowns.iter().zip(&alpha).map(|(u, a)| a * sol.value(u).substitute(&pick)).sum();
        let pairing = pairing.simplify();
        if classify(&pairing, sampler) != ZeroTest::Zero {
            out.push(normalize(&pairing));
        }
    }
    Ok(out)
}

/// Run the constraint algorithm for at most `max_iter` iterations.
pub fn run_chain(
    prob: &PresymplecticProblem,
    max_iter: usize,
    sampler: &mut Sampler,
) -> Result<ConstraintChain, ConstraintError> {
    if max_iter == 0 {
        return Err(ConstraintError::InvalidIterations);
    }
    let chart = prob.phi.source().clone();
    let coords = chart.coords().to_vec();
    let n = coords.len();
    let pulled = prob.pulled_omega()?;
    let om: Vec<Vec<Expr>> = (0..n).map(|a| (0..n).map(|b| pulled.coefficient(&[a, b])).collect()).collect();
    let what = "the pulled-back 2-form";
    let rank = constant_rank(what, &om, &coords, sampler)?;
    let sym_rank = {
        let unknowns: Vec<String> = (0..n).map(|a| format!("__z{a}")).collect();
        let eqs = om.iter().map(|row| row.iter().zip(&unknowns).map(|(c, z)| c * Expr::sym(z)).sum()).collect();
        n - solve_linear(&LinearSystem::new(unknowns, eqs)?, sampler)?.free.len()
    };
    agree(what, rank, sym_rank)?;

    let unknowns: Vec<String> = (0..n).map(|a| format!("__c{a}")).collect();
    let x = VectorFieldAlongMap::on(&chart, unknowns.iter().map(|u| Expr::sym(u)).collect())?;
    let equations = contract(&x, &pulled)?.sub(&prob.alpha)?.components().expect("1-form");

    let mut red = Reduction::default();
    let mut generations: Vec<Vec<Expr>> = Vec::new();
    let mut status = ChainStatus::MaxIterations;
    let mut gamma = VectorFieldAlongMap::zero(SmoothMap::identity(&chart));
    let mut parameters = Vec::new();

    for _ in 0..max_iter {
        let eqs: Vec<Expr> = equations.iter().map(|e| red.reduce(e)).collect();
        let sol = solve_linear(&LinearSystem::new(unknowns.clone(), eqs)?, sampler)?;
        let (fresh, inconsistent) = absorb(&sol.conditions, &mut red, &coords, sampler)?;
        if inconsistent {
            generations.push(fresh);
            status = ChainStatus::EmptyFinalSet;
            break;
        }
        if !fresh.is_empty() {
            generations.push(fresh);
            continue;
        }

        let rename: BTreeMap<String, Expr> =
            sol.free.iter().enumerate().map(|(k, f)| (f.clone(), Expr::sym(&format!("mu_{k}")))).collect();
        let mus: Vec<String> = (0..sol.free.len()).map(|k| format!("mu_{k}")).collect();
        let mut comps: Vec<Expr> = unknowns.iter().map(|u| sol.value(u).substitute(&rename).simplify()).collect();

        let field = VectorFieldAlongMap::on(&chart, comps.clone())?;
        let tangency: Vec<Expr> = generations.iter().flatten().map(|chi| red.reduce(&act(&field, chi))).collect();
        let tsol = solve_linear(&LinearSystem::new(mus.clone(), tangency)?, sampler)?;
        let fixed: BTreeMap<String, Expr> = tsol.solution.clone();
        comps = comps.iter().map(|c| red.reduce(&c.substitute(&fixed)).simplify()).collect();
        let (fresh, inconsistent) = absorb(&tsol.conditions, &mut red, &coords, sampler)?;
        gamma = VectorFieldAlongMap::on(&chart, comps)?;
        parameters = mus.into_iter().filter(|m| !fixed.contains_key(m)).collect();
        if inconsistent {
            generations.push(fresh);
            status = ChainStatus::EmptyFinalSet;
            break;
        }
        if fresh.is_empty() {
            status = ChainStatus::Stabilized;
            break;
        }
        generations.push(fresh);
    }

    Ok(ConstraintChain { generations, status, gamma, parameters, solved: red.order })
}

/// Add new conditions to the reduction; returns the independent ones and
/// whether a nonzero constant appeared.
fn absorb(
    conditions: &[Expr],
    red: &mut Reduction,
    coords: &[String],
    sampler: &mut Sampler,
) -> Result<(Vec<Expr>, bool), ConstraintError> {
    let mut fresh: Vec<Expr> = Vec::new();
    for c in conditions {
        let chi = normalize(&red.reduce(c).simplify());
        if classify(&chi, sampler) == ZeroTest::Zero || fresh.contains(&chi) {
            continue;
        }
        if chi.is_constant() {
            fresh.push(chi);
            return Ok((fresh, true));
        }
        red.insert(&chi, coords)?;
        fresh.push(chi);
    }
    Ok((fresh, false))
}

/// Transfer of a Hamiltonian-side constraint `ζ` to `TQ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintTransfer {
    pub zeta: Expr,
    /// `φ*ζ`.
    pub pulled: Expr,
    /// `K_L(ζ)`.
    pub kl: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianChain {
    pub chain: ConstraintChain,
    pub transfers: Vec<ConstraintTransfer>,
}

/// The problem `P = TQ`, `φ = FL`, `ω = ω₀`, `α = dE_L`.
pub fn lagrangian_problem(sys: &LagrangianSystem, sampler: &mut Sampler) -> Result<PresymplecticProblem, ConstraintError> {
    let fl = sys.legendre().fl;
    PresymplecticProblem::new(fl, canonical_symplectic(sys.chart()), sys.energy_differential(), sampler)
}

pub fn lagrangian_chain(
    sys: &LagrangianSystem,
    max_iter: usize,
    sampler: &mut Sampler,
) -> Result<LagrangianChain, ConstraintError> {
    let prob = lagrangian_problem(sys, sampler)?;
    let chain = run_chain(&prob, max_iter, sampler)?;
    let k = sys.evolution_operator();
    let mut transfers = Vec::new();
    for zeta in sys.primary_hamiltonian_constraints() {
        let pulled = prob.phi.pull(&zeta).simplify();
        let kl = kl_apply(&k, &zeta)?;
        transfers.push(ConstraintTransfer { zeta, pulled, kl });
    }
    Ok(LagrangianChain { chain, transfers })
}

/// Largest value of `i_Γ(φ*ω) − α` on the final constraint set, with the
/// free parameters drawn at random.
pub fn soundness_residual(
    prob: &PresymplecticProblem,
    chain: &ConstraintChain,
    sampler: &mut Sampler,
) -> Result<f64, ConstraintError> {
    let lhs = contract(&chain.gamma, &prob.pulled_omega()?)?.sub(&prob.alpha)?;
    let mut worst: f64 = 0.0;
    for c in lhs.components().expect("1-form") {
        worst = worst.max(max_abs(&chain.reduce(&c), sampler, CHECK_POINTS));
    }
    Ok(worst)
}

/// Largest value of `Γ(χ)` on the final constraint set over all constraints.
pub fn tangency_residual(chain: &ConstraintChain, sampler: &mut Sampler) -> f64 {
    chain.constraints().map(|chi| max_abs(&chain.reduce(&act(&chain.gamma, chi)), sampler, CHECK_POINTS)).fold(0.0, f64::max)
}

use std::fmt::Display;

use serde_json::{json, Map, Value};

use crate::constraints::{lagrangian_chain, soundness_residual, tangency_residual, ChainStatus, ConstraintError};
use crate::control::{involutive, kalman_rank, lie_rank, reachability_demo, ControlError, DriftlessSystem, LinearControlSystem};
use crate::dynamics::{geodesic, integrate_sode, parallel_transport, Connection, DynamicsError};
use crate::geometry::VectorFieldAlongMap;
use crate::lagrangian::{kl_apply, LagrangianError, LagrangianSystem};
use crate::noether::{
    check_thm1, check_thm2, derive_f, relate_conventions, symmetry_from_constant, verify_numeric, NoetherError,
};
use crate::symcore::{normalize, Compiled, CompiledVec, EvalError, Expr, Sampler};

use super::model::{ConnectionSpec, Model, ModelError, SymmetryKind};

/// An analysis that could not be completed, with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

pub const EXIT_PARSE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

impl Failure {
    pub fn precondition(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_PRECONDITION, message: message.into() }
    }

    fn numeric(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_NUMERIC, message: message.into() }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure { code: EXIT_PARSE, message: e.to_string() }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Failure::numeric(e.to_string())
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::IntegrationBlowup { .. } | DynamicsError::ChartSingularity { .. } | DynamicsError::Eval(_) => {
                Failure::numeric(e.to_string())
            }
            _ => Failure::precondition(e.to_string()),
        }
    }
}

impl From<LagrangianError> for Failure {
    fn from(e: LagrangianError) -> Self {
        Failure::precondition(e.to_string())
    }
}

impl From<NoetherError> for Failure {
    fn from(e: NoetherError) -> Self {
        match e {
            NoetherError::Dynamics(d) => d.into(),
            other => Failure::precondition(other.to_string()),
        }
    }
}

impl From<ConstraintError> for Failure {
    fn from(e: ConstraintError) -> Self {
        match e {
            ConstraintError::Eval(d) => d.into(),
            other => Failure::precondition(other.to_string()),
        }
    }
}

impl From<ControlError> for Failure {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::Eval(d) => d.into(),
            ControlError::Dynamics(d) => d.into(),
            ControlError::NotFinite => Failure::numeric(e.to_string()),
            other => Failure::precondition(other.to_string()),
        }
    }
}

impl From<crate::geometry::GeometryError> for Failure {
    fn from(e: crate::geometry::GeometryError) -> Self {
        Failure::precondition(e.to_string())
    }
}

/// A report section with the CSV files it produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub section: Value,
    pub csv: Vec<(String, String)>,
}

/// Floats print with 17 significant digits; non-finite values are null.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format!("{x:.16e}").parse().expect("finite float"))
    } else {
        Value::Null
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn text(x: impl Display) -> Value {
    Value::String(x.to_string())
}

fn texts<T: Display>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(text).collect())
}

fn object(pairs: Vec<(&str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

fn system(model: &Model, sampler: &mut Sampler) -> Result<LagrangianSystem, Failure> {
    let l = model.lagrangian.clone().ok_or_else(|| Failure::precondition("model has no [lagrangian] section"))?;
    Ok(LagrangianSystem::build(l, &model.chart, sampler)?)
}

pub fn lagrangian(model: &Model, sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let sys = system(model, sampler)?;
    let mut out = vec![
        ("lagrangian", text(sys.lagrangian())),
        ("theta", text(sys.theta())),
        ("omega", text(sys.omega())),
        ("energy", text(sys.energy())),
        ("hessian_determinant", text(sys.hessian_determinant())),
        ("regular", text(sys.regularity())),
    ];
    let mut csv = Vec::new();
    if sys.is_regular() {
        let gamma = sys.dynamics(sampler)?;
        out.push(("forces", texts(gamma.forces())));
        if let Some(int) = &model.integrate {
            let curve = integrate_sode(&gamma, &int.x0, int.t_end, int.h)?;
            let e = Compiled::new(sys.energy(), &curve.names)?;
            let e0 = e.eval(&curve.states[0])?;
            let mut drift: f64 = 0.0;
            for s in &curve.states {
                drift = drift.max((e.eval(s)? - e0).abs());
            }
            out.push((
                "trajectory",
                object(vec![
                    ("steps", json!(curve.len() - 1)),
                    ("h", num(curve.h)),
                    ("final_state", nums(curve.last())),
                    ("energy_drift", num(drift)),
                ]),
            ));
            csv.push(("lagrangian".to_string(), curve.to_csv()));
        }
    }
    Ok(Outcome { section: object(out), csv })
}

pub fn noether(model: &Model, sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let sys = system(model, sampler)?;
    if !sys.is_regular() {
        return Err(Failure::precondition(format!(
            "noether requires a regular Lagrangian (regularity: {})",
            sys.regularity()
        )));
    }
    let tc = &model.chart;
    let mut symmetries = Vec::new();
    for s in &model.symmetries {
        let x = match s.kind {
            SymmetryKind::AlongTau => VectorFieldAlongMap::new(tc.tau().clone(), s.components.clone())?,
            SymmetryKind::OnTQ => VectorFieldAlongMap::on(tc.tq(), s.components.clone())?,
        };
        let mut entry = vec![
            ("name", text(&s.name)),
            ("kind", text(s.kind.as_str())),
            ("components", texts(&s.components)),
            ("gauge_derived", json!(s.gauge.is_none())),
        ];
        let f = match &s.gauge {
            Some(f) => f.clone(),
            None => match derive_f(&sys, &x, sampler) {
                Ok(f) => f,
                Err(NoetherError::CannotIntegrate(m)) => {
                    entry.push(("verdict", text("not_symmetry")));
                    entry.push(("gauge_error", text(format!("cannot integrate `{m}`"))));
                    symmetries.push(object(entry));
                    continue;
                }
                Err(e) => return Err(e.into()),
            },
        };
        let res = match s.kind {
            SymmetryKind::AlongTau => check_thm2(&sys, &x, &f, sampler)?,
            SymmetryKind::OnTQ => check_thm1(&sys, &x, &f, sampler)?,
        };
        entry.push(("f", text(&f)));
        entry.push(("verdict", text(res.verdict)));
        entry.push(("residuals", Value::Object(res.residuals.iter().map(|(k, v)| (k.clone(), num(*v))).collect())));
        if res.is_symmetry() {
            entry.push(("g", text(&res.g)));
            entry.push(("drift", num(verify_numeric(&sys, &res.g, model.trajectories, sampler)?)));
            entry.push(("round_trip", round_trip(&sys, &res.g, sampler)?));
            if s.kind == SymmetryKind::OnTQ {
                entry.push(("sign_convention", text("G = i_X theta_L - F")));
                let along = match relate_conventions(&sys, &x, &res.g, sampler)? {
                    Some(r) => object(vec![
                        ("components", texts(r.x.components())),
                        ("f", text(&r.f)),
                        ("g", text(&r.g)),
                        ("sum_is_constant", json!(r.sum_constant)),
                    ]),
                    None => Value::Null,
                };
                entry.push(("along_tau", along));
            } else {
                entry.push(("sign_convention", text("G = F - theta_L(X)")));
            }
        }
        symmetries.push(object(entry));
    }
    let mut constants = Vec::new();
    for g in &model.constants {
        constants.push(object(vec![("g", text(g)), ("symmetry", round_trip(&sys, g, sampler)?)]));
    }
    Ok(Outcome {
        section: object(vec![("symmetries", Value::Array(symmetries)), ("constants", Value::Array(constants))]),
        csv: Vec::new(),
    })
}

fn round_trip(sys: &LagrangianSystem, g: &Expr, sampler: &mut Sampler) -> Result<Value, Failure> {
    match symmetry_from_constant(sys, g, sampler) {
        Ok(c) => Ok(object(vec![("passes", json!(true)), ("components", texts(c.x.components())), ("f", text(&c.f))])),
        Err(e @ (NoetherError::NotAConstant(_) | NoetherError::RoundTripFailed | NoetherError::Linear(_))) => {
            Ok(object(vec![("passes", json!(false)), ("error", text(e))]))
        }
        Err(e) => Err(e.into()),
    }
}

fn transfer_entry(zeta: &Expr, pulled: &Expr, kl: &Expr, first: Option<&[Expr]>) -> Value {
    let mut e = vec![("zeta", text(zeta)), ("pulled", text(pulled)), ("kl", text(kl))];
    if let Some(first) = first {
        e.push(("kl_in_first_generation", json!(kl.is_zero() || first.contains(&normalize(kl)))));
    }
    object(e)
}

pub fn constraints(model: &Model, sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let sys = system(model, sampler)?;
    let lc = lagrangian_chain(&sys, model.max_iter, sampler)?;
    let ch = &lc.chain;
    let mut out = vec![
        ("generations", Value::Array(ch.generations.iter().map(|g| texts(g)).collect())),
        ("status", text(ch.status)),
        ("free_parameters", json!(ch.parameters.len())),
        ("parameters", texts(&ch.parameters)),
        ("gamma", texts(ch.gamma.components())),
        ("solved", Value::Object(ch.solved.iter().map(|(k, v)| (k.clone(), text(v))).collect())),
    ];
    if ch.status == ChainStatus::Stabilized {
        let prob = crate::constraints::lagrangian_problem(&sys, sampler)?;
        out.push(("soundness_residual", num(soundness_residual(&prob, ch, sampler)?)));
        out.push(("tangency_residual", num(tangency_residual(ch, sampler))));
    }
    let k = sys.evolution_operator();
    let fl = sys.legendre().fl;
    let mut transfers: Vec<Value> = lc.transfers.iter().map(|t| transfer_entry(&t.zeta, &t.pulled, &t.kl, None)).collect();
    for zeta in model.hamiltonian.iter().filter(|z| lc.transfers.iter().all(|t| &t.zeta != *z)) {
        transfers.push(transfer_entry(zeta, &fl.pull(zeta).simplify(), &kl_apply(&k, zeta)?, None));
    }
    out.push(("transfers", Value::Array(transfers)));
    Ok(Outcome { section: object(out), csv: Vec::new() })
}

pub fn kl(model: &Model, sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let sys = system(model, sampler)?;
    let k = sys.evolution_operator();
    let check = k.verify(&sys, sampler)?;
    let lc = lagrangian_chain(&sys, model.max_iter, sampler)?;
    let first: Vec<Expr> = lc.chain.generations.first().cloned().unwrap_or_default();
    let fl = sys.legendre().fl;
    let mut zetas = sys.primary_hamiltonian_constraints();
    for z in &model.hamiltonian {
        if !zetas.contains(z) {
            zetas.push(z.clone());
        }
    }
    let mut transfers = Vec::new();
    for z in &zetas {
        transfers.push(transfer_entry(z, &fl.pull(z).simplify(), &kl_apply(&k, z)?, Some(&first)));
    }
    Ok(Outcome {
        section: object(vec![
            ("components", texts(k.field.components())),
            ("symplectic_symbolic", json!(check.symplectic_symbolic)),
            ("symplectic_residual", num(check.symplectic_residual)),
            ("projection_symbolic", json!(check.projection_symbolic)),
            ("projection_residual", num(check.projection_residual)),
            ("holds", json!(check.holds())),
            ("first_generation", texts(&first)),
            ("transfers", Value::Array(transfers)),
        ]),
        csv: Vec::new(),
    })
}

pub fn geodesic_report(model: &Model, _sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let cm = model.connection.as_ref().ok_or_else(|| Failure::precondition("model has no [connection] section"))?;
    let int = model.integrate.as_ref().ok_or_else(|| Failure::precondition("model has no [integrate] section"))?;
    let tc = &model.chart;
    let n = tc.dim();
    let mut conn = match &cm.spec {
        ConnectionSpec::Linear(chr) => Connection::linear(tc, chr.clone())?,
        ConnectionSpec::General(c) => Connection::new(tc, c.clone())?,
    };
    if let Some(g) = &cm.guard {
        conn = conn.with_guard(g.clone());
    }
    let (q0, v0) = int.x0.split_at(n);
    let curve = geodesic(&conn, q0, v0, int.t_end, int.h)?;
    let transported = parallel_transport(&conn, &curve, v0)?;
    let defect = transported.iter().zip(&curve.last()[n..]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut out = vec![
        ("steps", json!(curve.len() - 1)),
        ("h", num(curve.h)),
        ("final_state", nums(curve.last())),
        ("transport_defect", num(defect)),
    ];
    if let Some(g) = &cm.metric {
        let speed: Expr = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| &g[i][j] * tc.v(i) * tc.v(j))
            .sum();
        let c = CompiledVec::new(&[speed], &curve.names)?;
        let s0 = c.eval(&curve.states[0])?[0];
        let mut drift: f64 = 0.0;
        for s in &curve.states {
            drift = drift.max((c.eval(s)?[0] - s0).abs());
        }
        out.push(("speed_drift", num(drift)));
    }
    Ok(Outcome { section: object(out), csv: vec![("geodesic".to_string(), curve.to_csv())] })
}

pub fn control(model: &Model, sampler: &mut Sampler) -> Result<Outcome, Failure> {
    let cm = model.control.as_ref().ok_or_else(|| Failure::precondition("model has no [control] section"))?;
    let mut out = Vec::new();
    let mut csv = Vec::new();
    if let Some((a, b)) = &cm.linear {
        let k = kalman_rank(&LinearControlSystem::new(a.clone(), b.clone())?);
        out.push((
            "kalman",
            object(vec![
                ("rank", json!(k.rank)),
                ("controllable", json!(k.controllable)),
                ("matrix", Value::Array(k.matrix.iter().map(|r| nums(r)).collect())),
            ]),
        ));
    }
    if let Some(gens) = &cm.generators {
        let base = model.chart.base();
        let sys = DriftlessSystem::new(base, gens.clone())?;
        let point = cm.point.clone().unwrap_or_else(|| vec![0.0; base.dim()]);
        let lr = lie_rank(&sys, &point)?;
        let mut probe_ranks = Vec::new();
        for _ in 0..5 {
            let p: Vec<f64> = (0..base.dim()).map(|_| sampler.coordinate()).collect();
            probe_ranks.push(lie_rank(&sys, &p)?.rank);
        }
        let mut d = vec![
            ("point", nums(&point)),
            ("rank", json!(lr.rank)),
            ("controllable", json!(lr.controllable)),
            ("bracket_depth", json!(lr.bracket_depth)),
            ("probe_ranks", json!(probe_ranks)),
            ("involutive", json!(involutive(&sys, sampler)?)),
        ];
        if let Some(target) = &cm.target {
            let r = reachability_demo(&sys, &point, target, cm.budget)?;
            let segments = r.signal.as_ref().map_or(0, |s| s.pieces().len());
            d.push((
                "reachability",
                object(vec![
                    ("target", nums(target)),
                    ("reached", json!(r.reached)),
                    ("error", num(r.error)),
                    ("endpoint", nums(&r.endpoint)),
                    ("segments", json!(segments)),
                ]),
            ));
            if let Some(sig) = &r.signal {
                csv.push(("control".to_string(), sig.to_csv()));
            }
        }
        out.push(("driftless", object(d)));
    }
    Ok(Outcome { section: object(out), csv })
}

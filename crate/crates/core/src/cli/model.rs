use std::collections::BTreeSet;

use serde::Deserialize;

use crate::geometry::GeometryError;
use crate::symcore::{parse, Expr};
use crate::tangentgeo::TangentChart;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model file: {0}")]
    Toml(String),
    #[error("{section}: cannot parse `{text}`: {message}")]
    Expression { section: String, text: String, message: String },
    #[error("{section}: undeclared symbol `{symbol}`")]
    Undeclared { section: String, symbol: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Chart(#[from] GeometryError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    manifold: RawManifold,
    lagrangian: Option<RawLagrangian>,
    #[serde(default)]
    symmetries: Vec<RawSymmetry>,
    noether: Option<RawNoether>,
    connection: Option<RawConnection>,
    control: Option<RawControl>,
    constraints: Option<RawConstraints>,
    integrate: Option<RawIntegrate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    coordinates: Vec<String>,
    velocities: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLagrangian {
    #[serde(rename = "L")]
    l: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetry {
    name: Option<String>,
    components: Vec<String>,
    gauge: Option<String>,
    kind: SymmetryKind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoether {
    #[serde(default)]
    constants: Vec<String>,
    trajectories: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnection {
    #[serde(default)]
    linear: bool,
    christoffel: Option<Vec<Vec<Vec<String>>>>,
    coefficients: Option<Vec<Vec<String>>>,
    guard: Option<String>,
    metric: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    #[serde(rename = "A")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    b: Option<Vec<Vec<f64>>>,
    generators: Option<Vec<Vec<String>>>,
    point: Option<Vec<f64>>,
    target: Option<Vec<f64>>,
    budget: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraints {
    max_iter: Option<usize>,
    #[serde(default)]
    hamiltonian: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegrate {
    x0: Vec<f64>,
    #[serde(rename = "T")]
    t: f64,
    h: f64,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SymmetryKind {
    #[serde(rename = "on_TQ")]
    OnTQ,
    #[serde(rename = "along_tau")]
    AlongTau,
}

impl SymmetryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryKind::OnTQ => "on_TQ",
            SymmetryKind::AlongTau => "along_tau",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Symmetry {
    pub name: String,
    pub kind: SymmetryKind,
    pub components: Vec<Expr>,
    pub gauge: Option<Expr>,
}

#[derive(Debug, Clone)]
pub enum ConnectionSpec {
    Linear(Vec<Vec<Vec<Expr>>>),
    General(Vec<Vec<Expr>>),
}

#[derive(Debug, Clone)]
pub struct ConnectionModel {
    pub spec: ConnectionSpec,
    pub guard: Option<Expr>,
    pub metric: Option<Vec<Vec<Expr>>>,
}

#[derive(Debug, Clone)]
pub struct ControlModel {
    pub linear: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>,
    pub generators: Option<Vec<Vec<Expr>>>,
    pub point: Option<Vec<f64>>,
    pub target: Option<Vec<f64>>,
    pub budget: usize,
}

#[derive(Debug, Clone)]
pub struct IntegrateModel {
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub h: f64,
    pub seed: Option<u64>,
}

/// A validated model file.
#[derive(Debug, Clone)]
pub struct Model {
    pub chart: TangentChart,
    pub lagrangian: Option<Expr>,
    pub symmetries: Vec<Symmetry>,
    pub constants: Vec<Expr>,
    pub trajectories: usize,
    pub connection: Option<ConnectionModel>,
    pub control: Option<ControlModel>,
    pub max_iter: usize,
    pub hamiltonian: Vec<Expr>,
    pub integrate: Option<IntegrateModel>,
}

struct Scope<'a> {
    section: &'a str,
    allowed: BTreeSet<String>,
}

impl Scope<'_> {
    fn expr(&self, text: &str) -> Result<Expr, ModelError> {
        let e = parse(text).map_err(|e| ModelError::Expression {
            section: self.section.to_string(),
            text: text.to_string(),
            message: e.to_string(),
        })?;
        if let Some(s) = e.symbols().into_iter().find(|s| !self.allowed.contains(s)) {
            return Err(ModelError::Undeclared { section: self.section.to_string(), symbol: s });
        }
        Ok(e)
    }

    fn exprs(&self, texts: &[String]) -> Result<Vec<Expr>, ModelError> {
        texts.iter().map(|t| self.expr(t)).collect()
    }

    fn matrix(&self, rows: &[Vec<String>]) -> Result<Vec<Vec<Expr>>, ModelError> {
        rows.iter().map(|r| self.exprs(r)).collect()
    }
}

fn names(list: &[String]) -> BTreeSet<String> {
    list.iter().cloned().collect()
}

fn square(what: &str, rows: usize, cols: &[usize], n: usize) -> Result<(), ModelError> {
    if rows != n || cols.iter().any(|&c| c != n) {
        return Err(ModelError::Invalid(format!("{what} must be {n}×{n}")));
    }
    Ok(())
}

impl Model {
    pub fn parse(text: &str) -> Result<Model, ModelError> {
        let raw: RawModel = toml::from_str(text).map_err(|e| ModelError::Toml(e.to_string()))?;
        let coords = &raw.manifold.coordinates;
        if coords.is_empty() {
            return Err(ModelError::Invalid("[manifold] needs at least one coordinate".into()));
        }
        let chart = match &raw.manifold.velocities {
            Some(v) => {
                if v.len() != coords.len() {
                    return Err(ModelError::Invalid("[manifold] needs one velocity per coordinate".into()));
                }
                TangentChart::with_velocities(coords, v)?
            }
            None => TangentChart::new(coords)?,
        };
        let n = chart.dim();
        let q = names(chart.q_names());
        let qv: BTreeSet<String> = q.iter().chain(chart.v_names()).cloned().collect();
        let qp: BTreeSet<String> = q.iter().chain(chart.p_names()).cloned().collect();

        let lagrangian = match &raw.lagrangian {
            Some(l) => Some(Scope { section: "[lagrangian] L", allowed: qv.clone() }.expr(&l.l)?),
            None => None,
        };

        let mut symmetries = Vec::new();
        for (k, s) in raw.symmetries.iter().enumerate() {
            let name = s.name.clone().unwrap_or_else(|| format!("symmetry_{}", k + 1));
            let scope = Scope { section: "[[symmetries]]", allowed: qv.clone() };
            let expected = match s.kind {
                SymmetryKind::OnTQ => 2 * n,
                SymmetryKind::AlongTau => n,
            };
            if s.components.len() != expected {
                return Err(ModelError::Invalid(format!(
                    "symmetry `{name}` of kind {} needs {expected} components",
                    s.kind.as_str()
                )));
            }
            let gauge = s.gauge.as_deref().map(|g| scope.expr(g)).transpose()?;
            if s.kind == SymmetryKind::OnTQ && gauge.is_none() {
                return Err(ModelError::Invalid(format!("symmetry `{name}` on TQ needs a gauge")));
            }
            symmetries.push(Symmetry { name, kind: s.kind, components: scope.exprs(&s.components)?, gauge });
        }

        let (constants, trajectories) = match &raw.noether {
            Some(nt) => (
                Scope { section: "[noether] constants", allowed: qv.clone() }.exprs(&nt.constants)?,
                nt.trajectories.unwrap_or(3),
            ),
            None => (Vec::new(), 3),
        };

        let connection = match &raw.connection {
            None => None,
            Some(c) => {
                let base = Scope { section: "[connection]", allowed: q.clone() };
                let spec = if c.linear {
                    let chr = c
                        .christoffel
                        .as_ref()
                        .ok_or_else(|| ModelError::Invalid("a linear [connection] needs christoffel".into()))?;
                    if chr.len() != n {
                        return Err(ModelError::Invalid(format!("christoffel needs {n} blocks")));
                    }
                    let mut blocks = Vec::new();
                    for b in chr {
                        square("each christoffel block", b.len(), &b.iter().map(Vec::len).collect::<Vec<_>>(), n)?;
                        blocks.push(base.matrix(b)?);
                    }
                    ConnectionSpec::Linear(blocks)
                } else {
                    let co = c
                        .coefficients
                        .as_ref()
                        .ok_or_else(|| ModelError::Invalid("a nonlinear [connection] needs coefficients".into()))?;
                    square("coefficients", co.len(), &co.iter().map(Vec::len).collect::<Vec<_>>(), n)?;
                    ConnectionSpec::General(Scope { section: "[connection]", allowed: qv.clone() }.matrix(co)?)
                };
                let metric = match &c.metric {
                    Some(g) => {
                        square("metric", g.len(), &g.iter().map(Vec::len).collect::<Vec<_>>(), n)?;
                        Some(base.matrix(g)?)
                    }
                    None => None,
                };
                Some(ConnectionModel { spec, guard: c.guard.as_deref().map(|g| base.expr(g)).transpose()?, metric })
            }
        };

        let control = match &raw.control {
            None => None,
            Some(c) => {
                let linear = match (&c.a, &c.b) {
                    (Some(a), Some(b)) => Some((a.clone(), b.clone())),
                    (None, None) => None,
                    _ => return Err(ModelError::Invalid("[control] needs both A and B".into())),
                };
                let generators = match &c.generators {
                    Some(g) => {
                        if g.is_empty() || g.iter().any(|x| x.len() != n) {
                            return Err(ModelError::Invalid(format!(
                                "[control] generators need {n} components each"
                            )));
                        }
                        Some(Scope { section: "[control] generators", allowed: q.clone() }.matrix(g)?)
                    }
                    None => None,
                };
                for p in [&c.point, &c.target].into_iter().flatten() {
                    if p.len() != n {
                        return Err(ModelError::Invalid(format!("[control] points need {n} components")));
                    }
                }
                if linear.is_none() && generators.is_none() {
                    return Err(ModelError::Invalid("[control] needs A and B or generators".into()));
                }
                Some(ControlModel {
                    linear,
                    generators,
                    point: c.point.clone(),
                    target: c.target.clone(),
                    budget: c.budget.unwrap_or(12),
                })
            }
        };

        let (max_iter, hamiltonian) = match &raw.constraints {
            Some(c) => (
                c.max_iter.unwrap_or(crate::constraints::DEFAULT_MAX_ITER),
                Scope { section: "[constraints] hamiltonian", allowed: qp }.exprs(&c.hamiltonian)?,
            ),
            None => (crate::constraints::DEFAULT_MAX_ITER, Vec::new()),
        };

        let integrate = match &raw.integrate {
            None => None,
            Some(i) => {
                if i.x0.len() != 2 * n {
                    return Err(ModelError::Invalid(format!("[integrate] x0 needs {} components", 2 * n)));
                }
                Some(IntegrateModel { x0: i.x0.clone(), t_end: i.t, h: i.h, seed: i.seed })
            }
        };

        Ok(Model {
            chart,
            lagrangian,
            symmetries,
            constants,
            trajectories,
            connection,
            control,
            max_iter,
            hamiltonian,
            integrate,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model() {
        let m = Model::parse("[manifold]\ncoordinates = [\"q\"]\n[lagrangian]\nL = \"v^2/2 - q^2/2\"\n").unwrap();
        assert_eq!(m.chart.v_names(), ["v"]);
        assert!(m.lagrangian.is_some() && m.connection.is_none());
    }

    #[test]
    fn undeclared_symbols_are_rejected() {
        let e = Model::parse("[manifold]\ncoordinates = [\"q\"]\n[lagrangian]\nL = \"v^2/2 - z\"\n").unwrap_err();
        assert_eq!(e, ModelError::Undeclared { section: "[lagrangian] L".into(), symbol: "z".into() });
        let e = Model::parse("[manifold]\ncoordinates = [\"q\"]\n[lagrangian]\nL = \"v^2/\"\n").unwrap_err();
        assert!(matches!(e, ModelError::Expression { .. }));
        assert!(matches!(Model::parse("[manifold]\ncoordinates = 3\n"), Err(ModelError::Toml(_))));
    }

    #[test]
    fn shapes_are_checked() {
        let src = "[manifold]\ncoordinates = [\"x\", \"y\"]\n[integrate]\nx0 = [1.0]\nT = 1.0\nh = 0.1\n";
        assert!(matches!(Model::parse(src), Err(ModelError::Invalid(_))));
        let src = "[manifold]\ncoordinates = [\"x\"]\n[control]\nA = [[0.0]]\n";
        assert!(matches!(Model::parse(src), Err(ModelError::Invalid(_))));
    }
}

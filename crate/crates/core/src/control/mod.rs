//! Controllability tests: Kalman rank for linear systems, the Lie-algebra
//! rank condition and involutivity for driftless systems, and a greedy
//! reachability search.

use thiserror::Error;

use crate::dynamics::{integral_curve_along_map, ControlSignal, DynamicsError};
use crate::geometry::{lie_bracket, Chart, GeometryError, SmoothMap, VectorFieldAlongMap};
use crate::symcore::{numeric_rank, solve_linear, CompiledVec, EvalError, Expr, LinearSystem, Sampler};

/// Relative tolerance of every numeric rank computed here.
pub const RANK_TOL: f64 = 1e-10;
/// Distance at which a reachability search counts as successful.
pub const REACH_TOL: f64 = 1e-2;
const PROBE_POINTS: usize = 10;
const SEARCH_STEP: f64 = 1e-2;
const MAX_DURATION: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("inconsistent shapes: {0}")]
    Shape(String),
    #[error("a driftless system needs at least one generator")]
    NoGenerators,
    #[error("generators are not pointwise independent")]
    DependentGenerators,
    #[error("point has {found} components, expected {expected}")]
    StateSize { expected: usize, found: usize },
    #[error("generators cannot be evaluated at the point")]
    NotFinite,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// `ẋ = A x + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearControlSystem {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl LinearControlSystem {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self, ControlError> {
        let n = a.len();
        if a.iter().any(|r| r.len() != n) {
            return Err(ControlError::Shape("A must be square".into()));
        }
        if b.len() != n {
            return Err(ControlError::Shape(format!("B has {} rows, A has {n}", b.len())));
        }
        let m = b.first().map_or(0, Vec::len);
        if b.iter().any(|r| r.len() != m) {
            return Err(ControlError::Shape("B rows differ in length".into()));
        }
        Ok(LinearControlSystem { a, b })
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[Vec<f64>] {
        &self.b
    }

    pub fn states(&self) -> usize {
        self.a.len()
    }

    pub fn inputs(&self) -> usize {
        self.b.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanReport {
    pub rank: usize,
    pub controllable: bool,
    /// `[B | AB | … | A^{n−1}B]`.
    pub matrix: Vec<Vec<f64>>,
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| (0..cols).map(|j| row.iter().zip(b).map(|(x, br)| x * br[j]).sum()).collect())
        .collect()
}

pub fn kalman_rank(sys: &LinearControlSystem) -> KalmanReport {
    let n = sys.states();
    let mut matrix: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut block = sys.b.clone();
    for k in 0..n {
        if k > 0 {
            block = matmul(&sys.a, &block);
        }
        for (row, b) in matrix.iter_mut().zip(&block) {
            row.extend_from_slice(b);
        }
    }
    let rank = numeric_rank(&matrix, RANK_TOL);
    KalmanReport { rank, controllable: rank == n, matrix }
}

/// `ẋ = Σ u^a X_a(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftlessSystem {
    chart: Chart,
    generators: Vec<VectorFieldAlongMap>,
}

impl DriftlessSystem {
    pub fn new(chart: &Chart, generators: Vec<Vec<Expr>>) -> Result<Self, ControlError> {
        if generators.is_empty() {
            return Err(ControlError::NoGenerators);
        }
        let generators = generators
            .into_iter()
            .map(|g| VectorFieldAlongMap::on(chart, g))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(DriftlessSystem { chart: chart.clone(), generators })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn generators(&self) -> &[VectorFieldAlongMap] {
        &self.generators
    }

    /// `Σ u^a X_a` along the projection `M × U → M`.
    pub fn control_field(&self) -> Result<VectorFieldAlongMap, ControlError> {
        let inputs: Vec<String> = (1..=self.generators.len()).map(|a| format!("__u{a}")).collect();
        let big = Chart::new(
            format!("{}xU", self.chart.name()),
            self.chart.coords().iter().cloned().chain(inputs.iter().cloned()),
        )?;
        let pi = SmoothMap::new(big, self.chart.clone(), self.chart.coord_exprs())?;
        let comps = (0..self.chart.dim())
            .map(|i| self.generators.iter().zip(&inputs).map(|(g, u)| g.component(i) * Expr::sym(u)).sum())
            .collect();
        Ok(VectorFieldAlongMap::new(pi, comps)?)
    }

    fn values(&self, fields: &[VectorFieldAlongMap], point: &[f64]) -> Result<Vec<Vec<f64>>, ControlError> {
        let n = self.chart.dim();
        if point.len() != n {
            return Err(ControlError::StateSize { expected: n, found: point.len() });
        }
        let mut out = Vec::with_capacity(fields.len());
        for f in fields {
            let v = CompiledVec::new(f.components(), self.chart.coords())?.eval(point)?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(ControlError::NotFinite);
            }
            out.push(v);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieRank {
    pub rank: usize,
    pub controllable: bool,
    /// Smallest bracket depth at which `rank` is attained.
    pub bracket_depth: usize,
}

/// Rank at `point` of the generators and their iterated brackets, up to
/// depth `2n`.
pub fn lie_rank(sys: &DriftlessSystem, point: &[f64]) -> Result<LieRank, ControlError> {
    let n = sys.chart.dim();
    let mut all: Vec<VectorFieldAlongMap> = sys.generators.clone();
    let mut rank = numeric_rank(&sys.values(&all, point)?, RANK_TOL);
    let mut depth = 0;
    let mut level = sys.generators.clone();
    for d in 1..=2 * n {
        if rank == n {
            break;
        }
        let mut next = Vec::new();
        for x in &sys.generators {
            for y in &level {
                let z = lie_bracket(x, y)?;
                if !z.is_structurally_zero() && !all.contains(&z) && !next.contains(&z) {
                    next.push(z);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        all.extend(next.iter().cloned());
        let r = numeric_rank(&sys.values(&all, point)?, RANK_TOL);
        if r > rank {
            rank = r;
            depth = d;
        }
        level = next;
    }
    Ok(LieRank { rank, controllable: rank == n, bracket_depth: depth })
}

/// Whether every bracket `[X_a, X_b]` is a function combination of the
/// generators.
pub fn involutive(sys: &DriftlessSystem, sampler: &mut Sampler) -> Result<bool, ControlError> {
    let r = sys.generators.len();
    let coords = sys.chart.coords();
    let points: Vec<Vec<f64>> =
        (0..PROBE_POINTS).map(|_| coords.iter().map(|_| sampler.coordinate()).collect()).collect();
    for p in &points {
        if numeric_rank(&sys.values(&sys.generators, p)?, RANK_TOL) != r {
            return Err(ControlError::DependentGenerators);
        }
    }
    let unknowns: Vec<String> = (0..r).map(|k| format!("__k{k}")).collect();
    for a in 0..r {
        for b in a + 1..r {
            let z = lie_bracket(&sys.generators[a], &sys.generators[b])?;
            if z.is_structurally_zero() {
                continue;
            }
            let eqs: Vec<Expr> = (0..sys.chart.dim())
                .map(|i| {
                    let comb: Expr =
                        sys.generators.iter().zip(&unknowns).map(|(g, k)| g.component(i) * Expr::sym(k)).sum();
                    comb - z.component(i)
                })
                .collect();
            let sys_lin = LinearSystem::new(unknowns.clone(), eqs).expect("affine by construction");
            let in_span = match solve_linear(&sys_lin, sampler) {
                Ok(sol) => sol.conditions.is_empty(),
                Err(_) => {
                    let mut fields = sys.generators.clone();
                    fields.push(z);
                    let mut ok = true;
                    for p in &points {
                        ok &= numeric_rank(&sys.values(&fields, p)?, RANK_TOL) == r;
                    }
                    ok
                }
            };
            if !in_span {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reachability {
    pub reached: bool,
    /// `None` when the start already lies within tolerance.
    pub signal: Option<ControlSignal>,
    /// Endpoint of the replayed signal.
    pub endpoint: Vec<f64>,
    pub error: f64,
    /// Integration step used for every simulation.
    pub h: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unit control along generator `a` with the given sign.
fn unit(r: usize, a: usize, s: f64) -> Vec<f64> {
    let mut u = vec![0.0; r];
    u[a] = s;
    u
}

/// Piecewise-constant controls as `(duration, u)` pairs.
type Pieces = Vec<(f64, Vec<f64>)>;

struct Search<'a> {
    field: VectorFieldAlongMap,
    sys: &'a DriftlessSystem,
}

impl Search<'_> {
    fn run(&self, x0: &[f64], pieces: &[(f64, Vec<f64>)]) -> Option<Vec<f64>> {
        let sig = ControlSignal::from_durations(pieces.to_vec()).ok()?;
        let c = integral_curve_along_map(&self.field, &sig, x0, SEARCH_STEP).ok()?;
        Some(c.curve.last()[..self.sys.chart.dim()].to_vec())
    }

    /// Single-generator moves with linearized durations.
    fn straight(&self, x: &[f64], target: &[f64]) -> Result<Vec<Pieces>, ControlError> {
        let r = self.sys.generators.len();
        let vals = self.sys.values(&self.sys.generators, x)?;
        let e: Vec<f64> = target.iter().zip(x).map(|(t, y)| t - y).collect();
        let mut out = Vec::new();
        for (a, v) in vals.iter().enumerate() {
            let vv = dot(v, v);
            if vv < 1e-12 {
                continue;
            }
            let t = dot(&e, v) / vv;
            if t.abs() > 1e-9 {
                out.push(vec![(t.abs().min(MAX_DURATION), unit(r, a, t.signum()))]);
            }
        }
        Ok(out)
    }

    /// Square loops `a, b, −a, −b` whose side is sized by the bracket.
    fn loops(&self, x: &[f64], target: &[f64]) -> Result<Vec<Pieces>, ControlError> {
        let g = &self.sys.generators;
        let r = g.len();
        let e: Vec<f64> = target.iter().zip(x).map(|(t, y)| t - y).collect();
        let mut out = Vec::new();
        for a in 0..r {
            for b in a + 1..r {
                let z = lie_bracket(&g[a], &g[b])?;
                let bv = &self.sys.values(std::slice::from_ref(&z), x)?[0];
                let bb = dot(bv, bv);
                if bb < 1e-12 {
                    continue;
                }
                let area = dot(&e, bv) / bb;
                if area.abs() < 1e-12 {
                    continue;
                }
                let s = area.abs().sqrt().min(MAX_DURATION);
                let (p, q) = if area > 0.0 { (a, b) } else { (b, a) };
                out.push(vec![
                    (s, unit(r, p, 1.0)),
                    (s, unit(r, q, 1.0)),
                    (s, unit(r, p, -1.0)),
                    (s, unit(r, q, -1.0)),
                ]);
            }
        }
        Ok(out)
    }

    /// Durations `t` minimizing `|e − Σ t_a X_a(x)|`, one move per generator.
    fn coordinated(&self, x: &[f64], target: &[f64]) -> Result<Pieces, ControlError> {
        let r = self.sys.generators.len();
        let vals = self.sys.values(&self.sys.generators, x)?;
        let e: Vec<f64> = target.iter().zip(x).map(|(t, y)| t - y).collect();
        let gram: Vec<Vec<f64>> = vals.iter().map(|a| vals.iter().map(|b| dot(a, b)).collect()).collect();
        let rhs: Vec<f64> = vals.iter().map(|a| dot(a, &e)).collect();
        let Some(t) = solve_small(gram, rhs) else { return Ok(Vec::new()) };
        Ok(t.iter()
            .enumerate()
            .filter(|(_, t)| t.abs() > 1e-9)
            .map(|(a, t)| (t.abs().min(MAX_DURATION), unit(r, a, t.signum())))
            .collect())
    }

    /// Coordinated moves preceded by a loop that cancels the drift they
    /// cause along the brackets.
    fn compound(&self, x: &[f64], target: &[f64]) -> Result<Vec<Pieces>, ControlError> {
        let moves = self.coordinated(x, target)?;
        if moves.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = vec![moves.clone()];
        let Some(y) = self.run(x, &moves) else { return Ok(out) };
        let shifted: Vec<f64> = x.iter().zip(target).zip(&y).map(|((a, t), b)| a + t - b).collect();
        for lp in self.loops(x, &shifted)? {
            let mut c = self.calibrate(x, target, lp, &moves);
            c.extend(moves.iter().cloned());
            out.push(c);
        }
        Ok(out)
    }

    /// Rescale the side of a loop, followed by `suffix`, to minimize the
    /// final error: a coarse grid, then golden-section refinement.
    fn calibrate(
        &self,
        x: &[f64],
        target: &[f64],
        lp: Vec<(f64, Vec<f64>)>,
        suffix: &[(f64, Vec<f64>)],
    ) -> Vec<(f64, Vec<f64>)> {
        let scaled = |k: f64| -> Vec<(f64, Vec<f64>)> { lp.iter().map(|(d, u)| (d * k, u.clone())).collect() };
        let err = |k: f64| {
            let mut p = scaled(k);
            p.extend(suffix.iter().cloned());
            self.run(x, &p).map_or(f64::INFINITY, |y| dist(&y, target))
        };
        let grid = [0.25, 0.5, 0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.25, 1.5, 2.0];
        let errs: Vec<f64> = grid.iter().map(|&k| err(k)).collect();
        let i = (0..grid.len()).min_by(|&a, &b| errs[a].total_cmp(&errs[b])).unwrap_or(5);
        let (mut lo, mut hi) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..24 {
            let (a, b) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
            if err(a) < err(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let k = 0.5 * (lo + hi);
        scaled(if err(k) < errs[i] { k } else { grid[i] })
    }
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() <= RANK_TOL * scale.max(1e-300) {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (b[i] - (i + 1..n).map(|j| a[i][j] * x[j]).sum::<f64>()) / a[i][i];
    }
    Some(x)
}

/// Greedy piecewise-constant search from `x0` towards `target` using at
/// most `budget` segments.
pub fn reachability_demo(
    sys: &DriftlessSystem,
    x0: &[f64],
    target: &[f64],
    budget: usize,
) -> Result<Reachability, ControlError> {
    let n = sys.chart.dim();
    for p in [x0, target] {
        if p.len() != n {
            return Err(ControlError::StateSize { expected: n, found: p.len() });
        }
    }
    let search = Search { field: sys.control_field()?, sys };
    let mut pieces: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut x = x0.to_vec();
    let mut err = dist(&x, target);
    while err >= REACH_TOL {
        let mut candidates = search.straight(&x, target)?;
        for lp in search.loops(&x, target)? {
            candidates.push(search.calibrate(&x, target, lp, &[]));
        }
        candidates.extend(search.compound(&x, target)?);
        let mut best: Option<(f64, Pieces, Vec<f64>)> = None;
        for c in candidates {
            if pieces.len() + c.len() > budget {
                continue;
            }
            if let Some(y) = search.run(&x, &c) {
                let e = dist(&y, target);
                if e < err && best.as_ref().is_none_or(|b| e < b.0) {
                    best = Some((e, c, y));
                }
            }
        }
        let Some((e, c, y)) = best else { break };
        pieces.extend(c);
        x = y;
        err = e;
    }
    if pieces.is_empty() {
        return Ok(Reachability { reached: err < REACH_TOL, signal: None, endpoint: x, error: err, h: SEARCH_STEP });
    }
    let signal = ControlSignal::from_durations(pieces)?;
    let replay = integral_curve_along_map(&search.field, &signal, x0, SEARCH_STEP)?;
    let endpoint = replay.curve.last()[..n].to_vec();
    let error = dist(&endpoint, target);
    Ok(Reachability { reached: error < REACH_TOL, signal: Some(signal), endpoint, error, h: SEARCH_STEP })
}

//! Gauss-Jordan elimination over the field of rational functions in the
//! coordinates, with numerically certified symbolic pivots.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::expr::Expr;
use super::probe::{classify, Sampler, ZeroTest};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("equation `{equation}` is not affine in unknown `{unknown}`")]
    NonAffineEquation { equation: String, unknown: String },
    #[error("cannot certify whether pivot `{0}` vanishes")]
    PivotUndecidable(String),
}

/// Equations (each required to vanish) affine in a list of unknowns.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    unknowns: Vec<String>,
    equations: Vec<Expr>,
}

impl LinearSystem {
    pub fn new(unknowns: Vec<String>, equations: Vec<Expr>) -> Result<LinearSystem, LinearError> {
        for eq in &equations {
            for u in &unknowns {
                let du = eq.diff(u);
                for w in &unknowns {
                    if !du.diff(w).is_zero() {
                        return Err(LinearError::NonAffineEquation {
                            equation: eq.to_string(),
                            unknown: u.clone(),
                        });
                    }
                }
            }
        }
        Ok(LinearSystem { unknowns, equations })
    }

    pub fn unknowns(&self) -> &[String] {
        &self.unknowns
    }

    pub fn equations(&self) -> &[Expr] {
        &self.equations
    }
}

/// Parametric solution of a linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    /// Pivot unknowns expressed through coordinates and free unknowns.
    pub solution: BTreeMap<String, Expr>,
    pub free: BTreeSet<String>,
    /// Expressions that must vanish for the system to be solvable.
    pub conditions: Vec<Expr>,
}

impl LinearSolution {
    /// Value of an unknown: its solved expression or itself when free.
    pub fn value(&self, unknown: &str) -> Expr {
        self.solution.get(unknown).cloned().unwrap_or_else(|| Expr::sym(unknown))
    }

    pub fn is_consistent(&self) -> bool {
        self.conditions.is_empty()
    }
}

/// Scale a constraint so its leading numeric coefficient is one.
pub fn normalize(e: &Expr) -> Expr {
    if e.is_zero() {
        return e.clone();
    }
    let c = e.leading_coefficient();
    if c.is_one() {
        return e.clone();
    }
    match (c.as_rational(), c.as_f64()) {
        (Some(r), _) => e * Expr::from_rational(r.recip()),
        (None, Some(x)) if x != 0.0 => e * Expr::float(1.0 / x),
        _ => e.clone(),
    }
}

fn pivot_cost(e: &Expr) -> (u8, usize) {
    if e.is_constant() {
        (0, 0)
    } else if e.is_monomial() {
        (1, e.size())
    } else {
        (2, e.size())
    }
}

pub fn solve_linear(sys: &LinearSystem, sampler: &mut Sampler) -> Result<LinearSolution, LinearError> {
    let n = sys.unknowns.len();
    let zero_map: BTreeMap<String, Expr> = sys.unknowns.iter().map(|u| (u.clone(), Expr::zero())).collect();

    // Rows hold coefficients followed by the right-hand side.
    let mut rows: Vec<Vec<Expr>> = sys
        .equations
        .iter()
        .map(|eq| {
            let mut row: Vec<Expr> = sys.unknowns.iter().map(|u| eq.diff(u)).collect();
            row.push(-eq.substitute(&zero_map));
            row
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == rows.len() {
            break;
        }
        let mut best: Option<(usize, (u8, usize))> = None;
        let mut undecided: Option<Expr> = None;
        for i in r..rows.len() {
            match classify(&rows[i][c], sampler) {
                ZeroTest::Zero => rows[i][c] = Expr::zero(),
                ZeroTest::NonZero => {
                    let cost = pivot_cost(&rows[i][c]);
                    if best.is_none_or(|(_, b)| cost < b) {
                        best = Some((i, cost));
                    }
                }
                ZeroTest::Undecided => undecided = Some(rows[i][c].clone()),
            }
        }
        let Some((p, _)) = best else {
            if let Some(e) = undecided {
                return Err(LinearError::PivotUndecidable(e.to_string()));
            }
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        rows[r] = rows[r].iter().map(|x| x * &inv).collect();
        rows[r][c] = Expr::one();
        for i in 0..rows.len() {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone();
            let (head, tail) = if i < r {
                let (a, b) = rows.split_at_mut(r);
                (&mut a[i], &b[0])
            } else {
                let (a, b) = rows.split_at_mut(i);
                (&mut b[0], &a[r])
            };
            for k in 0..=n {
                if !tail[k].is_zero() {
                    head[k] = &head[k] - &factor * &tail[k];
                }
            }
            head[c] = Expr::zero();
        }
        pivots.push((r, c));
        r += 1;
    }

    let pivot_cols: BTreeSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free: BTreeSet<String> =
        (0..n).filter(|c| !pivot_cols.contains(c)).map(|c| sys.unknowns[c].clone()).collect();

    let mut solution = BTreeMap::new();
    for &(row, c) in &pivots {
        let mut value = rows[row][n].clone();
        for f in 0..n {
            if f != c && !pivot_cols.contains(&f) && !rows[row][f].is_zero() {
                value = value - &rows[row][f] * Expr::sym(&sys.unknowns[f]);
            }
        }
        solution.insert(sys.unknowns[c].clone(), value);
    }

    let mut conditions: Vec<Expr> = Vec::new();
    for row in rows.iter().skip(pivots.len()) {
        let rhs = &row[n];
        if classify(rhs, sampler) == ZeroTest::Zero {
            continue;
        }
        let cond = normalize(rhs);
        if !conditions.contains(&cond) {
            conditions.push(cond);
        }
    }

    Ok(LinearSolution { solution, free, conditions })
}

/// Rank of a float matrix by row reduction with partial pivoting; entries
/// below `rel_tol` times the largest absolute entry count as zero.
pub fn numeric_rank(matrix: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let scale = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = rel_tol * scale;
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let (p, best) = (rank..rows).map(|i| (i, a[i][c].abs())).fold((rank, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if best <= tol {
            continue;
        }
        a.swap(rank, p);
        for i in rank + 1..rows {
            let f = a[i][c] / a[rank][c];
            if f != 0.0 {
                for k in c..cols {
                    a[i][k] -= f * a[rank][k];
                }
            }
        }
        rank += 1;
    }
    rank
}

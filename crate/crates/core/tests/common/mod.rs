#![allow(dead_code)]

use std::path::PathBuf;

use mech::geometry::{Chart, FormAlongMap, SmoothMap, VectorFieldAlongMap};
use mech::symcore::{normalize, Expr, Sampler};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn model_paths() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

pub fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Sparse polynomial with small integer coefficients and degree at most
/// two in each variable.
pub fn poly(s: &mut Sampler, vars: &[String], terms: usize) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..terms {
        let k = s.integer(1, 3);
        let mut t = Expr::int(if s.integer(0, 1) == 0 { k } else { -k });
        for _ in 0..s.integer(0, 2) {
            let v = &vars[s.integer(0, vars.len() as i64 - 1) as usize];
            t = t * Expr::sym(v).pow(s.integer(1, 2));
        }
        out = out + t;
    }
    out
}

pub struct Triple {
    pub n: Chart,
    pub m: Chart,
    pub phi: SmoothMap,
    pub x: VectorFieldAlongMap,
}

/// Random `φ: N → M` with a random field along it.
pub fn triple(s: &mut Sampler) -> Triple {
    let dn = s.integer(1, 3) as usize;
    let dm = s.integer(2, 3) as usize;
    let n = Chart::new("N", names("z", dn)).unwrap();
    let m = Chart::new("M", names("x", dm)).unwrap();
    let comps = (0..dm).map(|_| poly(s, n.coords(), 2)).collect();
    let phi = SmoothMap::new(n.clone(), m.clone(), comps).unwrap();
    let xc = (0..dm).map(|_| poly(s, n.coords(), 2)).collect();
    let x = VectorFieldAlongMap::new(phi.clone(), xc).unwrap();
    Triple { n, m, phi, x }
}

pub fn scalar(chart: &Chart, f: Expr) -> FormAlongMap {
    FormAlongMap::scalar(SmoothMap::identity(chart), f)
}

pub fn exact(chart: &Chart, f: &Expr) -> FormAlongMap {
    mech::geometry::exterior_derivative(&scalar(chart, f.clone())).unwrap()
}

/// Random 1-form `f dg` or 2-form `f dg ∧ dh` on a chart, together with
/// its factors.
pub fn monomial_form(s: &mut Sampler, chart: &Chart, degree: usize) -> (FormAlongMap, Vec<Expr>) {
    let f = poly(s, chart.coords(), 2);
    let gs: Vec<Expr> = (0..degree).map(|_| poly(s, chart.coords(), 2)).collect();
    let mut form = scalar(chart, f.clone());
    for g in &gs {
        form = form.wedge(&exact(chart, g)).unwrap();
    }
    let mut factors = vec![f];
    factors.extend(gs);
    (form, factors)
}

pub fn random_form(s: &mut Sampler, chart: &Chart, degree: usize) -> FormAlongMap {
    let mut out = monomial_form(s, chart, degree).0;
    out = out.add(&monomial_form(s, chart, degree).0).unwrap();
    out
}

/// Chains hand-derived for the singular corpus.
pub const CHAIN_FIXTURES: &[(&str, &[&[&str]])] = &[
    ("singular_xy", &[&["v_x"]]),
    ("relative", &[]),
    ("linear_1d", &[]),
    ("multiplier", &[&["x"], &["v_x"], &["y"]]),
    ("first_order", &[]),
];

/// Brute-force constraint chain for `i_Γ ω_L = dE_L` on `TQ`, built from
/// partial derivatives alone: Gauss-Jordan elimination on the coefficient
/// matrix with constant pivots, left kernels for solvability, and
/// triangular substitution for the constraint set.
pub mod oracle {
    use std::collections::BTreeMap;

    use super::*;

    fn reduce(e: &Expr, sub: &BTreeMap<String, Expr>) -> Expr {
        e.substitute(sub).simplify()
    }

    /// Row echelon data of an `r × c` matrix with constant pivots:
    /// `(pivot columns, reduced rows, transform)` where `transform · A` is
    /// the reduced matrix.
    fn gauss(a: &[Vec<Expr>]) -> (Vec<usize>, Vec<Vec<Expr>>, Vec<Vec<Expr>>) {
        let r = a.len();
        let c = if r == 0 { 0 } else { a[0].len() };
        let mut m: Vec<Vec<Expr>> = a.to_vec();
        let mut t: Vec<Vec<Expr>> =
            (0..r).map(|i| (0..r).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..c {
            let Some(p) = (row..r).find(|&i| !m[i][col].is_zero()) else { continue };
            assert!(m[p][col].is_constant(), "oracle only handles constant pivots, got {}", m[p][col]);
            m.swap(row, p);
            t.swap(row, p);
            let inv = m[row][col].recip();
            m[row] = m[row].iter().map(|x| (x * &inv).simplify()).collect();
            t[row] = t[row].iter().map(|x| (x * &inv).simplify()).collect();
            for i in 0..r {
                if i != row && !m[i][col].is_zero() {
                    let f = m[i][col].clone();
                    m[i] = m[i].iter().zip(&m[row]).map(|(x, y)| (x - &f * y).simplify()).collect();
                    t[i] = t[i].iter().zip(&t[row]).map(|(x, y)| (x - &f * y).simplify()).collect();
                }
            }
            pivots.push(col);
            row += 1;
        }
        (pivots, m, t)
    }

    /// Solve `A y = b`: particular solution, kernel basis, and the
    /// solvability conditions `δ · b` for the left kernel rows `δ`.
    fn solve(a: &[Vec<Expr>], b: &[Expr]) -> (Vec<Expr>, Vec<Vec<Expr>>, Vec<Expr>) {
        let c = if a.is_empty() { 0 } else { a[0].len() };
        let (pivots, m, t) = gauss(a);
        let rank = pivots.len();
        let tb: Vec<Expr> =
            t.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum::<Expr>().simplify()).collect();
        let conditions: Vec<Expr> = tb[rank..].to_vec();
        let mut particular = vec![Expr::zero(); c];
        for (k, &p) in pivots.iter().enumerate() {
            particular[p] = tb[k].clone();
        }
        let mut kernel = Vec::new();
        for f in (0..c).filter(|j| !pivots.contains(j)) {
            let mut v = vec![Expr::zero(); c];
            v[f] = Expr::one();
            for (k, &p) in pivots.iter().enumerate() {
                v[p] = (-&m[k][f]).simplify();
            }
            kernel.push(v);
        }
        (particular, kernel, conditions)
    }

    /// Solve `χ = 0` for its last coordinate with a constant coefficient.
    fn solve_for(chi: &Expr, coords: &[String]) -> (String, Expr) {
        for y in coords.iter().rev() {
            let c = chi.diff(y);
            if c.is_constant() && !c.is_zero() {
                let sol = (Expr::sym(y) - chi * c.recip()).simplify();
                if !sol.contains_symbol(y) {
                    return (y.clone(), sol);
                }
            }
        }
        panic!("oracle cannot solve `{chi}` for one coordinate");
    }

    pub fn chain(lagrangian: &Expr, q: &[String], v: &[String], max_iter: usize) -> Vec<Vec<Expr>> {
        let n = q.len();
        let coords: Vec<String> = q.iter().chain(v).cloned().collect();
        let theta: Vec<Expr> =
            (0..2 * n).map(|a| if a < n { lagrangian.diff(&v[a]) } else { Expr::zero() }).collect();
        let energy: Expr = v.iter().map(|vi| Expr::sym(vi) * lagrangian.diff(vi)).sum::<Expr>() - lagrangian;
        // Component b of i_Γ ω_L is Σ_a Γ^a (∂_b θ_a − ∂_a θ_b).
        let w: Vec<Vec<Expr>> = (0..2 * n)
            .map(|b| (0..2 * n).map(|a| (theta[a].diff(&coords[b]) - theta[b].diff(&coords[a])).simplify()).collect())
            .collect();
        let de: Vec<Expr> = coords.iter().map(|z| energy.diff(z)).collect();

        let mut sub: BTreeMap<String, Expr> = BTreeMap::new();
        let mut all: Vec<Expr> = Vec::new();
        let mut generations: Vec<Vec<Expr>> = Vec::new();
        let absorb = |conds: Vec<Expr>, sub: &mut BTreeMap<String, Expr>, all: &mut Vec<Expr>| -> Vec<Expr> {
            let mut fresh = Vec::new();
            for c in conds {
                let chi = normalize(&reduce(&c, sub));
                if chi.is_zero() || fresh.contains(&chi) {
                    continue;
                }
                if !chi.is_constant() {
                    let (y, sol) = solve_for(&chi, &coords);
                    let one: BTreeMap<String, Expr> = [(y.clone(), sol.clone())].into();
                    for val in sub.values_mut() {
                        *val = reduce(val, &one);
                    }
                    sub.insert(y, sol);
                }
                all.push(chi.clone());
                fresh.push(chi);
            }
            fresh
        };
        for _ in 0..max_iter {
            let wr: Vec<Vec<Expr>> = w.iter().map(|r| r.iter().map(|x| reduce(x, &sub)).collect()).collect();
            let br: Vec<Expr> = de.iter().map(|x| reduce(x, &sub)).collect();
            let (particular, kernel, conditions) = solve(&wr, &br);
            let fresh = absorb(conditions, &mut sub, &mut all);
            if !fresh.is_empty() {
                let stop = fresh.iter().any(Expr::is_constant);
                generations.push(fresh);
                if stop {
                    break;
                }
                continue;
            }
            // Γ = Γ_p + Σ μ_k K_k; tangency Γ(χ) = 0 is linear in μ.
            let along = |g: &[Expr], chi: &Expr| -> Expr {
                reduce(&g.iter().zip(&coords).map(|(gi, z)| gi * chi.diff(z)).sum::<Expr>(), &sub)
            };
            let mat: Vec<Vec<Expr>> = all.iter().map(|chi| kernel.iter().map(|k| along(k, chi)).collect()).collect();
            let rhs: Vec<Expr> = all.iter().map(|chi| (-along(&particular, chi)).simplify()).collect();
            let residues = if kernel.is_empty() {
                rhs.iter().map(|r| (-r).simplify()).collect()
            } else {
                solve(&mat, &rhs).2
            };
            let fresh = absorb(residues, &mut sub, &mut all);
            if fresh.is_empty() {
                break;
            }
            generations.push(fresh);
        }
        generations
    }
}

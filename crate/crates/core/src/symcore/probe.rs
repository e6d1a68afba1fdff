//! Seeded random probing: numeric zero tests and equality checks.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::Expr;

/// Absolute tolerance for numeric zero certification.
pub const ZERO_TOL: f64 = 1e-9;
/// Probes whose values all exceed this are certified nonzero.
pub const NONZERO_TOL: f64 = 1e-9;
/// Probes whose values all stay below this are certified zero (pivots).
pub const PIVOT_ZERO_TOL: f64 = 1e-12;
/// Default number of points for numeric identity checks.
pub const CHECK_POINTS: usize = 20;
/// Default number of points for pivot and regularity decisions.
pub const PIVOT_POINTS: usize = 5;

const MAX_RESAMPLE: usize = 20;

/// Source of random evaluation points. Coordinates are drawn uniformly from
/// `[-2, -0.1] ∪ [0.1, 2]`, away from the usual coordinate singularities.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    seed: u64,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream derived from this sampler's seed and a label.
    pub fn fork(&self, label: &str) -> Sampler {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        Sampler::new(self.seed ^ h)
    }

    pub fn coordinate(&mut self) -> f64 {
        let mag = self.rng.gen_range(0.1..2.0);
        if self.rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn integer(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn point<S: AsRef<str>>(&mut self, symbols: &[S]) -> HashMap<String, f64> {
        symbols.iter().map(|s| (s.as_ref().to_string(), self.coordinate())).collect()
    }

    /// Evaluate each expression at `n` random points of their joint symbols.
    /// Points where any expression is undefined are redrawn; returns one row
    /// of values per point.
    pub fn evaluate(&mut self, exprs: &[Expr], n: usize) -> Vec<Vec<f64>> {
        let mut syms = std::collections::BTreeSet::new();
        for e in exprs {
            syms.extend(e.symbols());
        }
        let syms: Vec<String> = syms.into_iter().collect();
        let mut rows = Vec::with_capacity(n);
        let mut attempts = 0;
        while rows.len() < n && attempts < n * MAX_RESAMPLE {
            attempts += 1;
            let pt = self.point(&syms);
            let vals: Result<Vec<f64>, _> = exprs.iter().map(|e| e.eval(&pt)).collect();
            if let Ok(v) = vals {
                if v.iter().all(|x| x.is_finite()) {
                    rows.push(v);
                }
            }
        }
        rows
    }
}

/// Outcome of deciding whether an expression vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    Undecided,
}

/// Pivot policy: nonzero constants and monomials are nonzero; otherwise
/// probe at `PIVOT_POINTS` points (all above 1e-9 is nonzero, all below
/// 1e-12 is zero, anything else is undecided).
pub fn classify(e: &Expr, sampler: &mut Sampler) -> ZeroTest {
    if e.is_zero() {
        return ZeroTest::Zero;
    }
    if e.is_constant() || e.is_monomial() {
        return ZeroTest::NonZero;
    }
    let rows = sampler.evaluate(std::slice::from_ref(e), PIVOT_POINTS);
    if rows.is_empty() {
        return ZeroTest::Undecided;
    }
    if rows.iter().all(|r| r[0].abs() > NONZERO_TOL) {
        ZeroTest::NonZero
    } else if rows.iter().all(|r| r[0].abs() < PIVOT_ZERO_TOL) {
        ZeroTest::Zero
    } else {
        ZeroTest::Undecided
    }
}

/// Structural zero, or numerically zero at `CHECK_POINTS` random points.
pub fn is_zero(e: &Expr, sampler: &mut Sampler) -> bool {
    if e.is_zero() {
        return true;
    }
    if e.is_constant() {
        return e.as_f64().is_some_and(|x| x.abs() <= ZERO_TOL);
    }
    max_abs(e, sampler, CHECK_POINTS) <= ZERO_TOL
}

/// Largest absolute value of `e` over `n` random points (0 for an empty
/// sample; infinity when no point could be evaluated).
pub fn max_abs(e: &Expr, sampler: &mut Sampler, n: usize) -> f64 {
    if e.is_zero() {
        return 0.0;
    }
    let rows = sampler.evaluate(std::slice::from_ref(e), n);
    if rows.is_empty() {
        return f64::INFINITY;
    }
    rows.iter().map(|r| r[0].abs()).fold(0.0, f64::max)
}

/// Numeric equality of two expressions at `CHECK_POINTS` random points.
pub fn numeric_equal(a: &Expr, b: &Expr, sampler: &mut Sampler) -> bool {
    is_zero(&(a - b), sampler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symcore::parse;

    #[test]
    fn sampling_domain_avoids_origin() {
        let mut s = Sampler::new(7);
        for _ in 0..1000 {
            let x = s.coordinate();
            assert!((0.1..2.0).contains(&x.abs()));
        }
    }

    #[test]
    fn same_seed_same_points() {
        let mut a = Sampler::new(11);
        let mut b = Sampler::new(11);
        for _ in 0..10 {
            assert_eq!(a.coordinate(), b.coordinate());
        }
        assert_ne!(a.fork("x").coordinate(), a.fork("y").coordinate());
    }

    #[test]
    fn pivot_classification() {
        let mut s = Sampler::new(1);
        assert_eq!(classify(&parse("3*x*y^2").unwrap(), &mut s), ZeroTest::NonZero);
        assert_eq!(classify(&parse("x^2 + 1").unwrap(), &mut s), ZeroTest::NonZero);
        assert_eq!(classify(&parse("sin(x)^2 + cos(x)^2 - 1").unwrap(), &mut s), ZeroTest::Zero);
        assert_eq!(classify(&parse("x + y").unwrap(), &mut s), ZeroTest::NonZero);
    }

    #[test]
    fn transcendental_identity_is_numeric_zero() {
        let mut s = Sampler::new(3);
        assert!(is_zero(&parse("sin(2*x) - 2*sin(x)*cos(x)").unwrap(), &mut s));
        assert!(!is_zero(&parse("sin(x) - x").unwrap(), &mut s));
    }
}

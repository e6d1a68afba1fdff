//! Expression trees and their canonical form.
//!
//! Every `Expr` produced by the arithmetic operators, `diff`, `substitute`
//! or `simplify` is canonical: sums and products are flattened and sorted,
//! numeric factors are collected into a single leading coefficient, like
//! terms are merged and products are expanded over sums. Two canonical
//! expressions are equal exactly when their trees are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops;
use std::sync::Arc;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = Ratio<i128>;

/// Largest integer power of a sum that is expanded during simplification.
const MAX_EXPAND_POWER: i128 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Debug)]
pub enum Node {
    Num(Rational),
    Float(f64),
    Sym(Arc<str>),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Rational),
    Func(Func, Expr),
}

impl Node {
    fn rank(&self) -> u8 {
        match self {
            Node::Num(_) => 0,
            Node::Float(_) => 1,
            Node::Sym(_) => 2,
            Node::Pow(..) => 3,
            Node::Mul(_) => 4,
            Node::Add(_) => 5,
            Node::Func(..) => 6,
        }
    }
}

/// Immutable, cheaply clonable symbolic scalar.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (self.node(), other.node());
        match a.rank().cmp(&b.rank()) {
            Ordering::Equal => {}
            o => return o,
        }
        match (a, b) {
            (Node::Num(x), Node::Num(y)) => x.cmp(y),
            (Node::Float(x), Node::Float(y)) => x.total_cmp(y),
            (Node::Sym(x), Node::Sym(y)) => x.cmp(y),
            (Node::Add(x), Node::Add(y)) | (Node::Mul(x), Node::Mul(y)) => x.cmp(y),
            (Node::Pow(b1, e1), Node::Pow(b2, e2)) => b1.cmp(b2).then_with(|| e1.cmp(e2)),
            (Node::Func(f1, a1), Node::Func(f2, a2)) => f1.cmp(f2).then_with(|| a1.cmp(a2)),
            _ => unreachable!("ranks are equal"),
        }
    }
}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

/// Numeric coefficient used while collecting terms.
#[derive(Clone, Copy, Debug)]
enum Coef {
    Exact(Rational),
    Float(f64),
}

impl Coef {
    fn one() -> Coef {
        Coef::Exact(Rational::one())
    }

    fn mul(self, other: Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a * b),
            (a, b) => Coef::Float(a.to_f64() * b.to_f64()),
        }
    }

    fn add(self, other: Coef) -> Coef {
        match (self, other) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a + b),
            (a, b) => Coef::Float(a.to_f64() + b.to_f64()),
        }
    }

    fn to_f64(self) -> f64 {
        match self {
            Coef::Exact(r) => rational_to_f64(r),
            Coef::Float(x) => x,
        }
    }

    fn is_zero(self) -> bool {
        match self {
            Coef::Exact(r) => r.is_zero(),
            Coef::Float(x) => x == 0.0,
        }
    }

    fn is_one(self) -> bool {
        matches!(self, Coef::Exact(r) if r.is_one())
    }

    fn to_expr(self) -> Expr {
        match self {
            Coef::Exact(r) => Expr::from_node(Node::Num(r)),
            Coef::Float(x) => Expr::from_node(Node::Float(x)),
        }
    }
}

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn exact_root(n: i128, q: u32) -> Option<i128> {
    if n < 0 {
        if q.is_multiple_of(2) {
            return None;
        }
        return exact_root(-n, q).map(|r| -r);
    }
    let r = n.nth_root(q);
    (r.checked_pow(q) == Some(n)).then_some(r)
}

fn rational_pow(base: Rational, exp: Rational) -> Option<Rational> {
    if base.is_zero() {
        return if exp.is_positive() { Some(Rational::zero()) } else { None };
    }
    let q = u32::try_from(*exp.denom()).ok()?;
    let root = if q == 1 {
        base
    } else {
        Rational::new(exact_root(*base.numer(), q)?, exact_root(*base.denom(), q)?)
    };
    let p = i32::try_from(*exp.numer()).ok()?;
    if p.unsigned_abs() > 64 {
        return None;
    }
    let mut acc = Rational::one();
    for _ in 0..p.unsigned_abs() {
        acc = Rational::new(
            acc.numer().checked_mul(*root.numer())?,
            acc.denom().checked_mul(*root.denom())?,
        );
    }
    Some(if p < 0 { acc.recip() } else { acc })
}

impl Expr {
    pub(crate) fn from_node(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Expr::from_node(Node::Num(Rational::from_integer(n as i128)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        assert!(den != 0, "zero denominator");
        Expr::from_node(Node::Num(Rational::new(num as i128, den as i128)))
    }

    pub fn from_rational(r: Rational) -> Expr {
        Expr::from_node(Node::Num(r))
    }

    pub fn float(x: f64) -> Expr {
        Expr::from_node(Node::Float(x))
    }

    pub fn sym(name: &str) -> Expr {
        Expr::from_node(Node::Sym(Arc::from(name)))
    }

    // Raw (non-canonicalizing) constructors, used by the parser.

    pub fn raw_add(terms: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Add(terms))
    }

    pub fn raw_mul(factors: Vec<Expr>) -> Expr {
        Expr::from_node(Node::Mul(factors))
    }

    pub fn raw_pow(base: Expr, exp: Rational) -> Expr {
        Expr::from_node(Node::Pow(base, exp))
    }

    pub fn raw_func(f: Func, arg: Expr) -> Expr {
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.node() {
            Node::Num(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self.node() {
            Node::Num(r) => Some(rational_to_f64(*r)),
            Node::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.node() {
            Node::Num(r) => r.is_zero(),
            Node::Float(x) => *x == 0.0,
            _ => false,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Num(r) if r.is_one())
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.node(), Node::Num(_) | Node::Float(_))
    }

    /// Product of symbols raised to integer powers, times a nonzero constant.
    pub fn is_monomial(&self) -> bool {
        fn factor_ok(f: &Expr) -> bool {
            match f.node() {
                Node::Sym(_) => true,
                Node::Pow(b, e) => e.is_integer() && matches!(b.node(), Node::Sym(_)),
                _ => false,
            }
        }
        match self.node() {
            Node::Num(_) | Node::Float(_) => !self.is_zero(),
            Node::Mul(fs) => fs.iter().all(|f| f.is_constant() && !f.is_zero() || factor_ok(f)),
            _ => factor_ok(self),
        }
    }

    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Num(_) | Node::Float(_) => {}
            Node::Sym(s) => {
                out.insert(s.to_string());
            }
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::Func(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Num(_) | Node::Float(_) => false,
            Node::Sym(s) => &**s == name,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.contains_symbol(name)),
            Node::Pow(b, _) => b.contains_symbol(name),
            Node::Func(_, a) => a.contains_symbol(name),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Float(_) | Node::Sym(_) => 1,
            Node::Add(xs) | Node::Mul(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
            Node::Pow(b, _) => 1 + b.size(),
            Node::Func(_, a) => 1 + a.size(),
        }
    }

    /// Canonical form of an arbitrary (possibly raw) expression tree.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Float(_) | Node::Sym(_) => self.clone(),
            Node::Add(ts) => add(ts.iter().map(Expr::simplify).collect()),
            Node::Mul(fs) => mul(fs.iter().map(Expr::simplify).collect()),
            Node::Pow(b, e) => pow(&b.simplify(), *e),
            Node::Func(f, a) => func(*f, &a.simplify()),
        }
    }

    pub fn pow(&self, e: i64) -> Expr {
        pow(self, Rational::from_integer(e as i128))
    }

    pub fn pow_rational(&self, e: Rational) -> Expr {
        pow(self, e)
    }

    pub fn recip(&self) -> Expr {
        self.pow(-1)
    }

    pub fn sin(&self) -> Expr {
        func(Func::Sin, self)
    }

    pub fn cos(&self) -> Expr {
        func(Func::Cos, self)
    }

    pub fn exp(&self) -> Expr {
        func(Func::Exp, self)
    }

    pub fn ln(&self) -> Expr {
        func(Func::Ln, self)
    }

    pub fn sqrt(&self) -> Expr {
        func(Func::Sqrt, self)
    }

    /// Split a canonical term into its numeric coefficient and the rest.
    pub(crate) fn split_coefficient(&self) -> (Expr, Expr) {
        let (c, rest) = split_term(self);
        (c.to_expr(), rest)
    }

    /// Numeric coefficient of the leading term: the first non-constant term
    /// of a sum, or the expression itself.
    pub fn leading_coefficient(&self) -> Expr {
        match self.node() {
            Node::Add(ts) => ts
                .iter()
                .find(|t| !t.is_constant())
                .unwrap_or(&ts[0])
                .split_coefficient()
                .0,
            _ => self.split_coefficient().0,
        }
    }

    /// Terms of a canonical sum (a single term otherwise).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            _ if self.is_zero() => Vec::new(),
            _ => vec![self.clone()],
        }
    }
}

fn split_term(t: &Expr) -> (Coef, Expr) {
    match t.node() {
        Node::Num(r) => (Coef::Exact(*r), Expr::one()),
        Node::Float(x) => (Coef::Float(*x), Expr::one()),
        Node::Mul(fs) => {
            let c = match fs[0].node() {
                Node::Num(r) => Some(Coef::Exact(*r)),
                Node::Float(x) => Some(Coef::Float(*x)),
                _ => None,
            };
            match c {
                Some(c) if fs.len() == 2 => (c, fs[1].clone()),
                Some(c) => (c, Expr::from_node(Node::Mul(fs[1..].to_vec()))),
                None => (Coef::one(), t.clone()),
            }
        }
        _ => (Coef::one(), t.clone()),
    }
}

/// Attach a coefficient to a canonical non-numeric product or factor.
fn with_coef(c: Coef, rest: &Expr) -> Expr {
    if rest.is_one() {
        return c.to_expr();
    }
    if c.is_one() {
        return rest.clone();
    }
    let mut fs = vec![c.to_expr()];
    match rest.node() {
        Node::Mul(xs) => fs.extend(xs.iter().cloned()),
        _ => fs.push(rest.clone()),
    }
    Expr::from_node(Node::Mul(fs))
}

/// Canonical sum of canonical terms.
pub(crate) fn add(terms: Vec<Expr>) -> Expr {
    let mut collected: BTreeMap<Expr, Coef> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        if let Node::Add(inner) = t.node() {
            stack.extend(inner.iter().cloned());
            continue;
        }
        let (c, rest) = split_term(&t);
        collected
            .entry(rest)
            .and_modify(|acc| *acc = acc.add(c))
            .or_insert(c);
    }
    let out: Vec<Expr> = collected
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(rest, c)| with_coef(c, &rest))
        .collect();
    match out.len() {
        0 => Expr::zero(),
        1 => out.into_iter().next().unwrap(),
        _ => Expr::from_node(Node::Add(out)),
    }
}

fn base_exp(f: &Expr) -> (Expr, Rational) {
    match f.node() {
        Node::Pow(b, e) => (b.clone(), *e),
        _ => (f.clone(), Rational::one()),
    }
}

/// Canonical product of canonical factors.
pub(crate) fn mul(factors: Vec<Expr>) -> Expr {
    let mut coef = Coef::one();
    let mut powers: BTreeMap<Expr, Rational> = BTreeMap::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Num(r) => coef = coef.mul(Coef::Exact(*r)),
            Node::Float(x) => coef = coef.mul(Coef::Float(*x)),
            Node::Mul(inner) => stack.extend(inner.iter().cloned()),
            _ => {
                let (b, e) = base_exp(&f);
                *powers.entry(b).or_insert_with(Rational::zero) += e;
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
    }

    let mut out: Vec<Expr> = Vec::with_capacity(powers.len());
    let mut needs_pass = false;
    for (b, e) in powers {
        if e.is_zero() {
            continue;
        }
        if matches!(b.node(), Node::Add(_)) && e.is_integer() && e.is_positive() && *e.numer() <= MAX_EXPAND_POWER {
            for _ in 0..*e.numer() {
                out.push(b.clone());
            }
            continue;
        }
        let p = if e.is_one() { b.clone() } else { pow(&b, e) };
        match p.node() {
            Node::Num(r) => coef = coef.mul(Coef::Exact(*r)),
            Node::Float(x) => coef = coef.mul(Coef::Float(*x)),
            Node::Mul(_) => {
                needs_pass = true;
                out.push(p);
            }
            Node::Pow(pb, pe) if !(pb == &b && *pe == e) => {
                needs_pass = true;
                out.push(p);
            }
            _ => out.push(p),
        }
    }
    if coef.is_zero() {
        return Expr::zero();
    }
    if needs_pass {
        out.push(coef.to_expr());
        return mul(out);
    }

    if let Some(pos) = out.iter().position(|f| matches!(f.node(), Node::Add(_))) {
        let sum = out.remove(pos);
        let Node::Add(ts) = sum.node() else { unreachable!() };
        out.push(coef.to_expr());
        return add(
            ts.iter()
                .map(|t| {
                    let mut fs = out.clone();
                    fs.push(t.clone());
                    mul(fs)
                })
                .collect(),
        );
    }

    with_coef(coef, &product_node(out))
}

/// Sorted product node from canonical non-numeric factors with distinct bases.
fn product_node(mut fs: Vec<Expr>) -> Expr {
    match fs.len() {
        0 => Expr::one(),
        1 => fs.pop().unwrap(),
        _ => {
            fs.sort_by(|a, b| {
                let (ba, ea) = base_exp(a);
                let (bb, eb) = base_exp(b);
                ba.cmp(&bb).then(ea.cmp(&eb))
            });
            Expr::from_node(Node::Mul(fs))
        }
    }
}

/// Canonical power of a canonical base.
pub(crate) fn pow(b: &Expr, e: Rational) -> Expr {
    if e.is_zero() {
        return Expr::one();
    }
    if e.is_one() {
        return b.clone();
    }
    match b.node() {
        Node::Num(r) => match rational_pow(*r, e) {
            Some(v) => Expr::from_rational(v),
            None => Expr::from_node(Node::Pow(b.clone(), e)),
        },
        Node::Float(x) => {
            let v = x.powf(rational_to_f64(e));
            if v.is_finite() {
                Expr::float(v)
            } else {
                Expr::from_node(Node::Pow(b.clone(), e))
            }
        }
        Node::Pow(inner, e2) if e.is_integer() => pow(inner, *e2 * e),
        Node::Mul(fs) if e.is_integer() => mul(fs.iter().map(|f| pow(f, e)).collect()),
        Node::Add(_) if e.is_integer() && e.is_positive() && *e.numer() <= MAX_EXPAND_POWER => {
            let mut acc = b.clone();
            for _ in 1..*e.numer() {
                acc = mul(vec![acc, b.clone()]);
            }
            acc
        }
        _ => Expr::from_node(Node::Pow(b.clone(), e)),
    }
}

/// Canonical elementary function application.
pub(crate) fn func(f: Func, a: &Expr) -> Expr {
    if f == Func::Sqrt {
        return pow(a, Rational::new(1, 2));
    }
    match a.node() {
        Node::Num(r) if r.is_zero() => match f {
            Func::Sin => return Expr::zero(),
            Func::Cos | Func::Exp => return Expr::one(),
            _ => {}
        },
        Node::Num(r) if r.is_one() && f == Func::Ln => return Expr::zero(),
        Node::Float(x) => {
            let v = match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Exp => x.exp(),
                Func::Ln => x.ln(),
                Func::Sqrt => unreachable!(),
            };
            if v.is_finite() {
                return Expr::float(v);
            }
        }
        Node::Func(Func::Exp, inner) if f == Func::Ln => return inner.clone(),
        _ => {}
    }
    Expr::from_node(Node::Func(f, a.clone()))
}

impl Expr {
    /// True for a negative constant or a product with a negative coefficient.
    pub fn is_negative(&self) -> bool {
        match self.node() {
            Node::Num(r) => r.is_negative(),
            Node::Float(x) => *x < 0.0,
            Node::Mul(fs) => fs[0].as_f64().is_some_and(|x| x < 0.0),
            _ => false,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(&self, rhs)
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, &rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| add(vec![a.clone(), b.clone()]));
binop!(Sub, sub, |a, b| add(vec![a.clone(), mul(vec![Expr::int(-1), b.clone()])]));
binop!(Mul, mul, |a, b| mul(vec![a.clone(), b.clone()]));
binop!(Div, div, |a, b| mul(vec![a.clone(), pow(b, -Rational::one())]));

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        mul(vec![Expr::int(-1), self])
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        mul(vec![Expr::int(-1), self.clone()])
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        add(iter.collect())
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        mul(iter.collect())
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<&str> for Expr {
    fn from(s: &str) -> Expr {
        Expr::sym(s)
    }
}

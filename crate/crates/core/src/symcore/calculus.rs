use std::collections::BTreeMap;

use num_traits::One;

use super::expr::{add, func, mul, pow, Expr, Func, Node, Rational};

impl Expr {
    /// Partial derivative with respect to the symbol `x`. Expects a canonical
    /// receiver; every other symbol is held constant.
    pub fn diff(&self, x: &str) -> Expr {
        if !self.contains_symbol(x) {
            return Expr::zero();
        }
        match self.node() {
            Node::Num(_) | Node::Float(_) => Expr::zero(),
            Node::Sym(s) => {
                if &**s == x {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => add(ts.iter().map(|t| t.diff(x)).collect()),
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.diff(x);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors = fs.clone();
                    factors[i] = df;
                    terms.push(mul(factors));
                }
                add(terms)
            }
            Node::Pow(b, e) => mul(vec![
                Expr::from_rational(*e),
                pow(b, *e - Rational::one()),
                b.diff(x),
            ]),
            Node::Func(f, a) => {
                let outer = match f {
                    Func::Sin => func(Func::Cos, a),
                    Func::Cos => -func(Func::Sin, a),
                    Func::Exp => func(Func::Exp, a),
                    Func::Ln => pow(a, -Rational::one()),
                    Func::Sqrt => mul(vec![Expr::rational(1, 2), pow(a, Rational::new(-1, 2))]),
                };
                mul(vec![outer, a.diff(x)])
            }
        }
    }

    /// Simultaneous substitution of symbols, followed by simplification.
    pub fn substitute(&self, bindings: &BTreeMap<String, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.simplify();
        }
        match self.node() {
            Node::Num(_) | Node::Float(_) => self.clone(),
            Node::Sym(s) => bindings.get(&**s).cloned().unwrap_or_else(|| self.clone()).simplify(),
            Node::Add(ts) => add(ts.iter().map(|t| t.substitute(bindings)).collect()),
            Node::Mul(fs) => mul(fs.iter().map(|f| f.substitute(bindings)).collect()),
            Node::Pow(b, e) => pow(&b.substitute(bindings), *e),
            Node::Func(f, a) => func(*f, &a.substitute(bindings)),
        }
    }

    /// Substitute a single symbol.
    pub fn subs(&self, name: &str, value: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), value.clone());
        self.substitute(&m)
    }
}

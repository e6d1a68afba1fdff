use std::collections::HashMap;

use thiserror::Error;

use super::expr::{rational_to_f64, Expr, Func, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

fn apply_func(f: Func, x: f64) -> Result<f64, EvalError> {
    match f {
        Func::Sin => Ok(x.sin()),
        Func::Cos => Ok(x.cos()),
        Func::Exp => Ok(x.exp()),
        Func::Ln if x <= 0.0 => Err(EvalError::DomainError(format!("ln of non-positive value {x}"))),
        Func::Ln => Ok(x.ln()),
        Func::Sqrt if x < 0.0 => Err(EvalError::DomainError(format!("sqrt of negative value {x}"))),
        Func::Sqrt => Ok(x.sqrt()),
    }
}

fn apply_pow(b: f64, num: i128, den: i128) -> Result<f64, EvalError> {
    if den == 1 {
        if b == 0.0 && num < 0 {
            return Err(EvalError::DomainError("zero raised to a negative power".into()));
        }
        return Ok(b.powi(num as i32));
    }
    if b < 0.0 {
        return Err(EvalError::DomainError(format!("fractional power of negative value {b}")));
    }
    if b == 0.0 && num < 0 {
        return Err(EvalError::DomainError("zero raised to a negative power".into()));
    }
    Ok(b.powf(num as f64 / den as f64))
}

impl Expr {
    /// IEEE double evaluation under a full binding of the free symbols.
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
        self.eval_with(&|name| bindings.get(name).copied())
    }

    pub fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        match self.node() {
            Node::Num(r) => Ok(rational_to_f64(*r)),
            Node::Float(x) => Ok(*x),
            Node::Sym(s) => lookup(s).ok_or_else(|| EvalError::UnboundSymbol(s.to_string())),
            Node::Add(ts) => ts.iter().try_fold(0.0, |acc, t| Ok(acc + t.eval_with(lookup)?)),
            Node::Mul(fs) => fs.iter().try_fold(1.0, |acc, f| Ok(acc * f.eval_with(lookup)?)),
            Node::Pow(b, e) => apply_pow(b.eval_with(lookup)?, *e.numer(), *e.denom()),
            Node::Func(f, a) => apply_func(*f, a.eval_with(lookup)?),
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Const(f64),
    Var(usize),
    Add(usize),
    Mul(usize),
    Pow(i128, i128),
    Func(Func),
}

/// An expression flattened into a stack program over indexed variables;
/// used by the integrators where the same expression is evaluated many
/// thousands of times.
#[derive(Debug, Clone)]
pub struct Compiled {
    ops: Vec<Op>,
    depth: usize,
}

impl Compiled {
    pub fn new(e: &Expr, vars: &[String]) -> Result<Compiled, EvalError> {
        let mut ops = Vec::new();
        emit(e, vars, &mut ops)?;
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Add(n) | Op::Mul(n) => depth -= n - 1,
                Op::Pow(..) | Op::Func(_) => {}
            }
            max = max.max(depth);
        }
        Ok(Compiled { ops, depth: max })
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut stack: Vec<f64> = Vec::with_capacity(self.depth);
        for op in &self.ops {
            match *op {
                Op::Const(c) => stack.push(c),
                Op::Var(i) => stack.push(x[i]),
                Op::Add(n) => {
                    let at = stack.len() - n;
                    let s = stack[at..].iter().sum();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Mul(n) => {
                    let at = stack.len() - n;
                    let s = stack[at..].iter().product();
                    stack.truncate(at);
                    stack.push(s);
                }
                Op::Pow(num, den) => {
                    let b = stack.pop().unwrap();
                    stack.push(apply_pow(b, num, den)?);
                }
                Op::Func(f) => {
                    let a = stack.pop().unwrap();
                    stack.push(apply_func(f, a)?);
                }
            }
        }
        Ok(stack.pop().unwrap_or(0.0))
    }
}

fn emit(e: &Expr, vars: &[String], ops: &mut Vec<Op>) -> Result<(), EvalError> {
    match e.node() {
        Node::Num(r) => ops.push(Op::Const(rational_to_f64(*r))),
        Node::Float(x) => ops.push(Op::Const(*x)),
        Node::Sym(s) => {
            let i = vars
                .iter()
                .position(|v| v.as_str() == &**s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.to_string()))?;
            ops.push(Op::Var(i));
        }
        Node::Add(xs) | Node::Mul(xs) => {
            for x in xs {
                emit(x, vars, ops)?;
            }
            ops.push(if matches!(e.node(), Node::Add(_)) { Op::Add(xs.len()) } else { Op::Mul(xs.len()) });
        }
        Node::Pow(b, p) => {
            emit(b, vars, ops)?;
            ops.push(Op::Pow(*p.numer(), *p.denom()));
        }
        Node::Func(f, a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Func(*f));
        }
    }
    Ok(())
}

/// A vector of expressions compiled against one variable ordering.
#[derive(Debug, Clone)]
pub struct CompiledVec {
    items: Vec<Compiled>,
}

impl CompiledVec {
    pub fn new(es: &[Expr], vars: &[String]) -> Result<CompiledVec, EvalError> {
        Ok(CompiledVec { items: es.iter().map(|e| Compiled::new(e, vars)).collect::<Result<_, _>>()? })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        for (o, c) in out.iter_mut().zip(&self.items) {
            *o = c.eval(x)?;
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut out = vec![0.0; self.items.len()];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }
}

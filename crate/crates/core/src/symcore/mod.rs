//! Minimal computer-algebra kernel.

mod calculus;
mod eval;
mod expr;
mod linear;
mod parse;
mod probe;

pub use eval::{Compiled, CompiledVec, EvalError};
pub use expr::{Expr, Func, Node, Rational};
pub use linear::{normalize, numeric_rank, solve_linear, LinearError, LinearSolution, LinearSystem};
pub use parse::{parse, ParseError};
pub use probe::{
    classify, is_zero, max_abs, numeric_equal, Sampler, ZeroTest, CHECK_POINTS, PIVOT_POINTS, ZERO_TOL,
};

/// Parse an expression literal known to be valid; panics otherwise.
pub fn ex(src: &str) -> Expr {
    parse(src).unwrap_or_else(|e| panic!("invalid expression literal `{src}`: {e}"))
}

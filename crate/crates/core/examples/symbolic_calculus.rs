//! Exact rational arithmetic, differentiation and seeded zero tests.
//!
//! ```not_rust
//! cargo run --example symbolic_calculus
//! ```

use mech::symcore::{classify, solve_linear, LinearSystem};
use mech::{parse, Sampler};

fn main() {
    let e = parse("(x + y)^2 - x^2 - 2*x*y").unwrap();
    println!("{e}");
    let f = parse("sin(x)*exp(x^2/2)").unwrap();
    println!("d/dx {f} = {}", f.diff("x"));

    let mut s = Sampler::new(1);
    let identity = parse("sin(x)^2 + cos(x)^2 - 1").unwrap();
    println!("{identity}: {:?}", classify(&identity, &mut s));

    let sys = LinearSystem::new(
        vec!["a".into(), "b".into()],
        vec![parse("x*a + b - 1").unwrap(), parse("a - y*b").unwrap()],
    )
    .unwrap();
    let sol = solve_linear(&sys, &mut s).unwrap();
    println!("a = {}", sol.value("a"));
    println!("b = {}", sol.value("b"));
}

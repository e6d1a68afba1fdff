//! Constraint algorithm for singular Lagrangians: generations, final
//! field and the Hamiltonian-side constraints carried over by K_L.
//!
//! ```not_rust
//! cargo run --example constraint_chain
//! ```

use mech::constraints::{lagrangian_chain, DEFAULT_MAX_ITER};
use mech::lagrangian::LagrangianSystem;
use mech::tangentgeo::TangentChart;
use mech::{ex, Sampler};

fn main() {
    let tc = TangentChart::new(&["x", "y"]).unwrap();
    let mut s = Sampler::new(5);
    for l in ["v_x^2/2 + x*v_y", "v_x^2/2 + y*(x - 1)", "(v_x - v_y)^2/2", "v_x^2/2 + y"] {
        let sys = LagrangianSystem::build(ex(l), &tc, &mut s).unwrap();
        let run = lagrangian_chain(&sys, DEFAULT_MAX_ITER, &mut s).unwrap();
        let c = &run.chain;
        println!("L = {l}");
        for (k, g) in c.generations.iter().enumerate() {
            let g: Vec<String> = g.iter().map(|e| e.to_string()).collect();
            println!("  generation {}: {}", k + 1, g.join(", "));
        }
        println!("  {} with parameters {:?}", c.status, c.parameters);
        println!("  Gamma = {}", c.gamma);
        for t in &run.transfers {
            println!("  {} pulls back to {} and maps to {}", t.zeta, t.pulled, t.kl);
        }
    }
}

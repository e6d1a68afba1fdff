//! The evolution operator K_L along the Legendre map and its two
//! defining equations.
//!
//! ```not_rust
//! cargo run --example evolution_operator
//! ```

use mech::lagrangian::{kl_apply, LagrangianSystem};
use mech::tangentgeo::TangentChart;
use mech::{ex, Sampler};

fn main() {
    let tc = TangentChart::new(&["x", "y"]).unwrap();
    let mut s = Sampler::new(2);
    let sys = LagrangianSystem::build(ex("v_x^2/2 + x*v_y"), &tc, &mut s).unwrap();
    let k = sys.evolution_operator();
    println!("K_L = {}", k.field);
    let check = k.verify(&sys, &mut s).unwrap();
    println!("i_K omega_0 = dE_L: {}", check.symplectic_symbolic);
    println!("T pi o K = T:       {}", check.projection_symbolic);
    for zeta in sys.primary_hamiltonian_constraints() {
        println!("K_L({zeta}) = {}", kl_apply(&k, &zeta).unwrap());
    }
    println!("K_L(p_x^2/2) = {}", kl_apply(&k, &ex("p_x^2/2")).unwrap());
}

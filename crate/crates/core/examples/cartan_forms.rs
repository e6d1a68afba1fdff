//! Cartan forms, energy and the Euler-Lagrange field of a double pendulum
//! style coupled oscillator.
//!
//! ```not_rust
//! cargo run --example cartan_forms
//! ```

use mech::dynamics::integrate_sode;
use mech::lagrangian::LagrangianSystem;
use mech::symcore::Compiled;
use mech::tangentgeo::TangentChart;
use mech::{ex, Sampler};

fn main() {
    let tc = TangentChart::with_velocities(&["a", "b"], &["va", "vb"]).unwrap();
    let mut s = Sampler::new(3);
    let l = ex("va^2 + va*vb*cos(a - b)/2 + vb^2/2 + 2*cos(a) + cos(b)");
    let sys = LagrangianSystem::build(l, &tc, &mut s).unwrap();
    println!("theta_L = {}", sys.theta());
    println!("omega_L = {}", sys.omega());
    println!("E_L     = {}", sys.energy());
    println!("regular: {}", sys.regularity());

    let gamma = sys.dynamics(&mut s).unwrap();
    let curve = integrate_sode(&gamma, &[0.4, -0.2, 0.0, 0.3], 10.0, 1e-3).unwrap();
    let e = Compiled::new(sys.energy(), tc.tq().coords()).unwrap();
    let e0 = e.eval(&curve.states[0]).unwrap();
    let drift = curve.states.iter().map(|x| (e.eval(x).unwrap() - e0).abs()).fold(0.0, f64::max);
    println!("energy drift over T = 10: {drift:.2e}");
}

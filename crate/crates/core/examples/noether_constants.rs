//! Symmetries, gauge terms and constants of motion, in both directions.
//!
//! ```not_rust
//! cargo run --example noether_constants
//! ```

use mech::geometry::VectorFieldAlongMap;
use mech::lagrangian::LagrangianSystem;
use mech::noether::{check_thm2, derive_f, symmetry_from_constant, verify_numeric};
use mech::tangentgeo::TangentChart;
use mech::{ex, Sampler};

fn main() {
    let tc = TangentChart::with_velocities(&["q1", "q2"], &["v1", "v2"]).unwrap();
    let mut s = Sampler::new(11);
    let sys = LagrangianSystem::build(ex("(v1^2 + v2^2)/2 - (q1^2 + q2^2)"), &tc, &mut s).unwrap();

    let candidates = [("rotation", vec!["q2", "-q1"]), ("time", vec!["v1", "v2"]), ("shift", vec!["1", "0"])];
    for (name, comps) in candidates {
        let x = VectorFieldAlongMap::new(tc.tau().clone(), comps.iter().map(|c| ex(c)).collect()).unwrap();
        let f = derive_f(&sys, &x, &mut s).unwrap_or_else(|_| ex("0"));
        let r = check_thm2(&sys, &x, &f, &mut s).unwrap();
        if r.is_symmetry() {
            let drift = verify_numeric(&sys, &r.g, 2, &mut s).unwrap();
            println!("{name}: F = {}, G = {}, drift {drift:.1e}", r.f, r.g);
        } else {
            println!("{name}: {}", r.verdict);
        }
    }

    let back = symmetry_from_constant(&sys, &ex("v1*v2 + 2*q1*q2"), &mut s).unwrap();
    println!("v1 v2 + 2 q1 q2 comes from X = {} with F = {}", back.x, back.f);
}

//! Controllability: Kalman rank, Lie algebra rank and a reachability
//! search for the Heisenberg system.
//!
//! ```not_rust
//! cargo run --example heisenberg_control
//! ```

use mech::control::{involutive, kalman_rank, lie_rank, reachability_demo, DriftlessSystem, LinearControlSystem};
use mech::geometry::Chart;
use mech::{ex, Sampler};

fn main() {
    let double = LinearControlSystem::new(vec![vec![0.0, 1.0], vec![0.0, 0.0]], vec![vec![0.0], vec![1.0]]).unwrap();
    let k = kalman_rank(&double);
    println!("double integrator: rank {}, controllable {}", k.rank, k.controllable);

    let r3 = Chart::new("R3", ["x", "y", "z"]).unwrap();
    let heis = DriftlessSystem::new(&r3, vec![vec![ex("1"), ex("0"), ex("0")], vec![ex("0"), ex("1"), ex("x")]]).unwrap();
    let lr = lie_rank(&heis, &[0.0, 0.0, 0.0]).unwrap();
    println!("heisenberg: rank {} at depth {}", lr.rank, lr.bracket_depth);
    println!("involutive: {}", involutive(&heis, &mut Sampler::new(0)).unwrap());

    let r = reachability_demo(&heis, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 8).unwrap();
    println!("reached {} with error {:.1e}", r.reached, r.error);
    if let Some(sig) = r.signal {
        for (a, b, u) in sig.pieces() {
            println!("  [{a:.4}, {b:.4}] u = {u:?}");
        }
    }
}

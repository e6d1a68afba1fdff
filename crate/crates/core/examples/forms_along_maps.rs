//! Forms and vector fields along a map, and the two derivations they
//! induce.
//!
//! ```not_rust
//! cargo run --example forms_along_maps
//! ```

use mech::geometry::{contract, exterior_derivative, lie_derivative, pullback, Chart, FormAlongMap, SmoothMap, VectorFieldAlongMap};
use mech::{ex, Sampler};

fn main() {
    let n = Chart::new("N", ["t", "s"]).unwrap();
    let m = Chart::new("M", ["x", "y", "z"]).unwrap();
    // A parametrized surface in R^3.
    let phi = SmoothMap::new(n.clone(), m.clone(), vec![ex("t"), ex("s"), ex("t^2 + s^2")]).unwrap();
    let x = VectorFieldAlongMap::new(phi.clone(), vec![ex("1"), ex("0"), ex("2*t")]).unwrap();

    let id = SmoothMap::identity(&m);
    let omega = FormAlongMap::scalar(id.clone(), ex("z"))
        .wedge(&FormAlongMap::differential(&m, 0))
        .unwrap()
        .wedge(&FormAlongMap::differential(&m, 1))
        .unwrap();
    println!("omega       = {omega}");
    println!("phi* omega  = {}", pullback(&phi, &omega).unwrap());
    println!("i_X omega   = {}", contract(&x, &omega).unwrap());
    println!("d_X omega   = {}", lie_derivative(&x, &omega).unwrap());

    let theta = FormAlongMap::one_form(id, vec![ex("y"), ex("-x"), ex("0")]).unwrap();
    let a = pullback(&phi, &exterior_derivative(&theta).unwrap()).unwrap();
    let b = exterior_derivative(&pullback(&phi, &theta).unwrap()).unwrap();
    println!("phi* d theta - d phi* theta: {:.1e}", a.residual(&b, &mut Sampler::new(0), 20).unwrap());
}

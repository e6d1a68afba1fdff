//! Geodesics and parallel transport on the round sphere.
//!
//! ```not_rust
//! cargo run --example sphere_geodesics
//! ```

use std::f64::consts::PI;

use mech::dynamics::{geodesic, parallel_transport, Connection, NumericCurve};
use mech::tangentgeo::TangentChart;
use mech::ex;

fn main() {
    let tc = TangentChart::new(&["th", "ph"]).unwrap();
    let z = || ex("0");
    let christoffel = vec![
        vec![vec![z(), z()], vec![z(), ex("-sin(th)*cos(th)")]],
        vec![vec![z(), ex("cos(th)/sin(th)")], vec![ex("cos(th)/sin(th)"), z()]],
    ];
    let sphere = Connection::linear(&tc, christoffel).unwrap().with_guard(ex("sin(th)"));

    let c = geodesic(&sphere, &[1.2, 0.0], &[0.3, 0.8], 5.0, 1e-3).unwrap();
    let speed = |s: &[f64]| (s[2] * s[2] + s[0].sin().powi(2) * s[3] * s[3]).sqrt();
    println!("end point {:?}", &c.last()[..2]);
    println!("speed {} -> {}", speed(&c.states[0]), speed(c.last()));

    for th0 in [0.3, 0.8, 1.2] {
        let lat = NumericCurve::sample(tc.tq().coords().to_vec(), 2.0 * PI, 1e-3, |t| vec![th0, t, 0.0, 1.0]).unwrap();
        let eta = parallel_transport(&sphere, &lat, &[1.0, 0.0]).unwrap();
        let angle = (th0.sin() * eta[1]).atan2(eta[0]);
        let expected = (PI - 2.0 * PI * th0.cos()).rem_euclid(2.0 * PI) - PI;
        println!("latitude {th0}: rotated by {angle:.6}, expected {expected:.6}");
    }

    match geodesic(&sphere, &[0.2, 0.0], &[-1.0, 0.0], 1.0, 1e-3) {
        Ok(_) => println!("pole not reached"),
        Err(e) => println!("{e}"),
    }
}

//! Vertical endomorphism, Liouville field, lifts and prolongations on the
//! tangent bundle of the plane.
//!
//! ```not_rust
//! cargo run --example tangent_structures
//! ```

use mech::geometry::VectorFieldAlongMap;
use mech::tangentgeo::{
    complete_lift, is_sode, liouville, newtonoid_project, prolong, vertical_endomorphism, vertical_lift_fn,
    SODEField, TangentChart,
};
use mech::ex;

fn main() {
    let tc = TangentChart::new(&["x", "y"]).unwrap();
    println!("Delta = {}", liouville(&tc));

    let gamma = SODEField::from_forces(&tc, vec![ex("-x"), ex("-y^3")]).unwrap();
    println!("Gamma = {}", gamma.field());
    println!("S(Gamma) = {}, second order: {}", vertical_endomorphism(&tc, gamma.field()).unwrap(), is_sode(&tc, gamma.field()));

    let rot = VectorFieldAlongMap::on(tc.base(), vec![ex("-y"), ex("x")]).unwrap();
    let lifted = complete_lift(&tc, &rot).unwrap();
    println!("complete lift of rotation = {lifted}");
    println!("projected onto Gamma = {}", newtonoid_project(&tc, &lifted, gamma.field()).unwrap());
    println!("(x y)^V = {}", vertical_lift_fn(&tc, &ex("x*y")).unwrap());

    let along = VectorFieldAlongMap::new(tc.tau().clone(), vec![ex("v_x"), ex("0")]).unwrap();
    println!("prolongation = {}", prolong(&tc, &along).unwrap());
}

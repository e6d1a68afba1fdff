use mech::geometry::VectorFieldAlongMap;
use mech::lagrangian::LagrangianSystem;
use mech::noether::{check_thm1, check_thm2, derive_f, symmetry_from_constant, verify_numeric, NoetherError};
use mech::symcore::numeric_equal;
use mech::tangentgeo::{complete_lift, TangentChart};
use mech::{ex, Sampler};
use proptest::prelude::*;

fn plane() -> TangentChart {
    TangentChart::with_velocities(&["q1", "q2"], &["v1", "v2"]).unwrap()
}

fn along_tau(tc: &TangentChart, comps: &[&str]) -> VectorFieldAlongMap {
    VectorFieldAlongMap::new(tc.tau().clone(), comps.iter().map(|c| ex(c)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any potential of `q1 - q2` is invariant under the diagonal shift,
    /// with conserved total momentum.
    #[test]
    fn diagonal_translation(c1 in 1i64..=3, c2 in -3i64..=3, c4 in 0i64..=2) {
        let tc = plane();
        let mut s = Sampler::new(1);
        let l = ex(&format!("(v1^2 + v2^2)/2 - {c1}*(q1 - q2)^2 - {c2}*(q1 - q2) - {c4}*(q1 - q2)^4"));
        let sys = LagrangianSystem::build(l, &tc, &mut s).unwrap();
        let x = along_tau(&tc, &["1", "1"]);
        let f = derive_f(&sys, &x, &mut s).unwrap();
        let r = check_thm2(&sys, &x, &f, &mut s).unwrap();
        prop_assert!(r.is_symmetry());
        prop_assert!(numeric_equal(&r.g, &ex("-(v1 + v2)"), &mut s));
        prop_assert!(verify_numeric(&sys, &r.g, 1, &mut s).unwrap() < 1e-8);
    }

    /// A single-coordinate shift is rejected as soon as the potential
    /// couples the coordinates.
    #[test]
    fn coupled_potential_breaks_translation(c in 1i64..=3) {
        let tc = plane();
        let mut s = Sampler::new(2);
        let sys = LagrangianSystem::build(ex(&format!("(v1^2 + v2^2)/2 - {c}*q1*q2")), &tc, &mut s).unwrap();
        let r = check_thm2(&sys, &along_tau(&tc, &["1", "0"]), &ex("0"), &mut s).unwrap();
        prop_assert!(!r.is_symmetry());
    }
}

#[test]
fn rotation_lifted_to_tq_conserves_angular_momentum() {
    let tc = plane();
    let mut s = Sampler::new(3);
    let sys = LagrangianSystem::build(ex("(v1^2 + v2^2)/2 - (q1^2 + q2^2)"), &tc, &mut s).unwrap();
    let y = VectorFieldAlongMap::on(tc.base(), vec![ex("-q2"), ex("q1")]).unwrap();
    let x = complete_lift(&tc, &y).unwrap();
    let r = check_thm1(&sys, &x, &ex("0"), &mut s).unwrap();
    assert!(r.is_symmetry());
    assert!(numeric_equal(&r.g, &ex("q1*v2 - q2*v1"), &mut s));
    assert!(r.residuals.values().all(|v| *v < 1e-9));
}

#[test]
fn energy_comes_from_the_velocity_field() {
    let tc = TangentChart::new(&["q"]).unwrap();
    let mut s = Sampler::new(4);
    let sys = LagrangianSystem::build(ex("v^2/2 - q^4/4"), &tc, &mut s).unwrap();
    let x = along_tau(&tc, &["v"]);
    let f = derive_f(&sys, &x, &mut s).unwrap();
    let r = check_thm2(&sys, &x, &f, &mut s).unwrap();
    assert!(r.is_symmetry());
    assert!(numeric_equal(&r.g, &(-sys.energy()), &mut s));
    let back = symmetry_from_constant(&sys, &r.g, &mut s).unwrap();
    assert!(numeric_equal(&back.x.components()[0], &ex("v"), &mut s));
}

#[test]
fn non_constants_are_refused() {
    let tc = TangentChart::new(&["q"]).unwrap();
    let mut s = Sampler::new(5);
    let sys = LagrangianSystem::build(ex("v^2/2 - q^2/2"), &tc, &mut s).unwrap();
    let e = symmetry_from_constant(&sys, &ex("q*v"), &mut s).unwrap_err();
    assert!(matches!(e, NoetherError::NotAConstant(_)));
}

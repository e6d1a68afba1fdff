use mech::control::{
    involutive, kalman_rank, lie_rank, reachability_demo, ControlError, DriftlessSystem, LinearControlSystem,
};
use mech::dynamics::integral_curve_along_map;
use mech::geometry::Chart;
use mech::{ex, Sampler};
use proptest::prelude::*;

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.len();
    a.iter().map(|r| (0..b[0].len()).map(|j| (0..k).map(|i| r[i] * b[i][j]).sum()).collect()).collect()
}

/// Unit upper triangular matrix and its inverse.
fn shear(c: &[f64; 3]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let t = vec![vec![1.0, c[0], c[1]], vec![0.0, 1.0, c[2]], vec![0.0, 0.0, 1.0]];
    let inv = vec![vec![1.0, -c[0], c[0] * c[2] - c[1]], vec![0.0, 1.0, -c[2]], vec![0.0, 0.0, 1.0]];
    (t, inv)
}

fn heisenberg() -> DriftlessSystem {
    let r3 = Chart::new("R3", ["x", "y", "z"]).unwrap();
    DriftlessSystem::new(&r3, vec![vec![ex("1"), ex("0"), ex("0")], vec![ex("0"), ex("1"), ex("x")]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The companion form with input on the last state is controllable for
    /// every characteristic polynomial, and stays so after a change of basis.
    #[test]
    fn companion_form_is_controllable(a in prop::array::uniform3(-3i32..=3), c in prop::array::uniform3(-2i32..=2)) {
        let a_mat = vec![
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![a[0] as f64, a[1] as f64, a[2] as f64],
        ];
        let b = vec![vec![0.0], vec![0.0], vec![1.0]];
        prop_assert_eq!(kalman_rank(&LinearControlSystem::new(a_mat.clone(), b.clone()).unwrap()).rank, 3);
        let (t, inv) = shear(&[c[0] as f64, c[1] as f64, c[2] as f64]);
        let sys = LinearControlSystem::new(matmul(&matmul(&t, &a_mat), &inv), matmul(&t, &b)).unwrap();
        prop_assert!(kalman_rank(&sys).controllable);
    }

    /// A block that the input never reaches caps the rank.
    #[test]
    fn decoupled_block_is_unreachable(d in prop::array::uniform3(-3i32..=3)) {
        let a = vec![
            vec![d[0] as f64, 1.0, 0.0],
            vec![0.0, d[1] as f64, 0.0],
            vec![0.0, 0.0, d[2] as f64],
        ];
        let b = vec![vec![0.0], vec![1.0], vec![0.0]];
        let k = kalman_rank(&LinearControlSystem::new(a, b).unwrap());
        prop_assert_eq!(k.rank, 2);
        prop_assert!(!k.controllable);
    }

    #[test]
    fn heisenberg_reaches_nearby_targets(t in prop::array::uniform3(-1.0f64..1.0)) {
        let r = reachability_demo(&heisenberg(), &[0.0, 0.0, 0.0], &t, 12).unwrap();
        prop_assert!(r.reached, "target {:?} error {}", t, r.error);
        prop_assert!(r.error < 1e-2);
    }

    #[test]
    fn heisenberg_rank_is_full_everywhere(p in prop::array::uniform3(-3.0f64..3.0)) {
        let lr = lie_rank(&heisenberg(), &p).unwrap();
        prop_assert_eq!((lr.rank, lr.bracket_depth), (3, 1));
    }
}

#[test]
fn heisenberg_is_not_involutive() {
    assert!(!involutive(&heisenberg(), &mut Sampler::new(1)).unwrap());
}

#[test]
fn rotation_fields_are_involutive_but_not_spanning() {
    let r3 = Chart::new("R3", ["x", "y", "z"]).unwrap();
    let sys = DriftlessSystem::new(&r3, vec![vec![ex("-y"), ex("x"), ex("0")], vec![ex("x"), ex("y"), ex("0")]]).unwrap();
    assert!(involutive(&sys, &mut Sampler::new(2)).unwrap());
    assert_eq!(lie_rank(&sys, &[1.0, 0.5, 0.0]).unwrap().rank, 2);
}

#[test]
fn shapes_are_validated() {
    assert!(matches!(
        LinearControlSystem::new(vec![vec![0.0, 1.0]], vec![vec![1.0]]),
        Err(ControlError::Shape(_))
    ));
    let r2 = Chart::new("R2", ["x", "y"]).unwrap();
    assert!(DriftlessSystem::new(&r2, vec![]).is_err());
}

#[test]
fn replayed_signal_reproduces_the_endpoint() {
    let sys = heisenberg();
    let r = reachability_demo(&sys, &[0.2, -0.1, 0.0], &[-0.5, 0.4, 0.7], 12).unwrap();
    let sig = r.signal.unwrap();
    let replay = integral_curve_along_map(&sys.control_field().unwrap(), &sig, &[0.2, -0.1, 0.0], r.h).unwrap();
    let end = &replay.curve.last()[..3];
    assert!(end.iter().zip(&r.endpoint).all(|(a, b)| (a - b).abs() < 1e-9));
}

#[test]
fn involutive_distributions_do_not_grow() {
    let r3 = Chart::new("R3", ["x", "y", "z"]).unwrap();
    let mut s = Sampler::new(3);
    for gens in [
        vec![vec![ex("1"), ex("0"), ex("0")], vec![ex("0"), ex("1"), ex("0")]],
        vec![vec![ex("-y"), ex("x"), ex("0")], vec![ex("x"), ex("y"), ex("0")]],
        vec![vec![ex("1"), ex("0"), ex("y")], vec![ex("0"), ex("1"), ex("x")]],
    ] {
        let sys = DriftlessSystem::new(&r3, gens).unwrap();
        assert!(involutive(&sys, &mut s).unwrap());
        for p in [[1.0, 0.5, -0.3], [-0.7, 1.2, 2.0]] {
            let lr = lie_rank(&sys, &p).unwrap();
            assert_eq!((lr.rank, lr.bracket_depth), (2, 0));
        }
    }
}

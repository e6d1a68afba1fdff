use std::collections::{BTreeMap, HashMap};

use mech::symcore::{normalize, parse, Compiled, Expr};
use proptest::prelude::*;

const VARS: [&str; 3] = ["x", "y", "z"];

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-4i64..=4).prop_map(Expr::int),
        (1i64..=3, 2i64..=5).prop_map(|(n, d)| Expr::rational(n, d)),
        (0usize..3).prop_map(|i| Expr::sym(VARS[i])),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 0i64..=3).prop_map(|(a, k)| a.pow(k)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
        ]
    })
}

fn point() -> impl Strategy<Value = HashMap<String, f64>> {
    prop::array::uniform3(-1.5f64..1.5).prop_map(|p| VARS.iter().map(|v| v.to_string()).zip(p).collect())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplify_is_idempotent(e in expr()) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s);
    }

    #[test]
    fn printed_form_parses_back(e in expr(), p in point()) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert!(close(back.eval(&p).unwrap(), e.eval(&p).unwrap(), 1e-12), "{} vs {}", back, e);
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), p in point(), i in 0usize..3) {
        let v = VARS[i];
        let h = 1e-5;
        let at = |dx: f64| {
            let mut q = p.clone();
            *q.get_mut(v).unwrap() += dx;
            e.eval(&q).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let exact = e.diff(v).eval(&p).unwrap();
        prop_assert!(close(exact, fd, 1e-5), "d/d{} of {}: {} vs {}", v, e, exact, fd);
    }

    #[test]
    fn derivatives_commute(e in expr()) {
        let a = e.diff("x").diff("y");
        let b = e.diff("y").diff("x");
        prop_assert_eq!((a - b).simplify(), Expr::zero());
    }

    #[test]
    fn product_rule(a in expr(), b in expr(), p in point()) {
        let lhs = (&a * &b).diff("x").eval(&p).unwrap();
        let rhs = (a.diff("x") * &b + &a * b.diff("x")).eval(&p).unwrap();
        prop_assert!(close(lhs, rhs, 1e-9));
    }

    #[test]
    fn compiled_agrees_with_tree(e in expr(), p in point()) {
        let vars: Vec<String> = VARS.iter().map(|v| v.to_string()).collect();
        let c = Compiled::new(&e, &vars).unwrap();
        let x: Vec<f64> = vars.iter().map(|v| p[v]).collect();
        prop_assert!(close(c.eval(&x).unwrap(), e.eval(&p).unwrap(), 1e-12));
    }

    #[test]
    fn substitution_is_composition(e in expr(), g in expr(), p in point()) {
        let sub: BTreeMap<String, Expr> = [("x".to_string(), g.clone())].into();
        let mut q = p.clone();
        q.insert("x".into(), g.eval(&p).unwrap());
        prop_assert!(close(e.substitute(&sub).eval(&p).unwrap(), e.eval(&q).unwrap(), 1e-9));
    }

    #[test]
    fn normalize_is_idempotent(e in expr()) {
        let n = normalize(&e);
        prop_assert_eq!(normalize(&n), n);
    }

    #[test]
    fn subtraction_cancels(e in expr()) {
        prop_assert!((&e - &e).is_zero());
    }
}

mod common;

use std::collections::BTreeSet;

use common::*;
use mech::cli::Model;
use mech::constraints::{lagrangian_chain, lagrangian_problem, soundness_residual, tangency_residual, ChainStatus};
use mech::lagrangian::LagrangianSystem;
use mech::symcore::normalize;
use mech::tangentgeo::TangentChart;
use mech::{ex, Expr, Sampler};
use proptest::prelude::*;

fn sets(gens: &[Vec<Expr>]) -> Vec<BTreeSet<String>> {
    gens.iter().map(|g| g.iter().map(|e| normalize(e).to_string()).collect()).collect()
}

fn check(l: &Expr, tc: &TangentChart, s: &mut Sampler) -> Vec<BTreeSet<String>> {
    let sys = LagrangianSystem::build(l.clone(), tc, s).unwrap();
    let run = lagrangian_chain(&sys, 10, s).unwrap();
    let oracle = oracle::chain(l, tc.q_names(), tc.v_names(), 10);
    assert_eq!(sets(&run.chain.generations), sets(&oracle), "L = {l}");
    if run.chain.status == ChainStatus::Stabilized {
        let prob = lagrangian_problem(&sys, s).unwrap();
        assert!(soundness_residual(&prob, &run.chain, s).unwrap() < 1e-9, "L = {l}");
        assert!(tangency_residual(&run.chain, s) < 1e-9, "L = {l}");
    }
    sets(&oracle)
}

#[test]
fn corpus_matches_fixtures_and_oracle() {
    let mut s = Sampler::new(1);
    for (name, fixture) in CHAIN_FIXTURES {
        let text = std::fs::read_to_string(models_dir().join(format!("{name}.toml"))).unwrap();
        let m = Model::parse(&text).unwrap();
        let got = check(m.lagrangian.as_ref().unwrap(), &m.chart, &mut s);
        let want: Vec<Vec<Expr>> = fixture.iter().map(|g| g.iter().map(|e| ex(e)).collect()).collect();
        assert_eq!(got, sets(&want), "{name}");
    }
}

#[test]
fn inconsistent_system_empties_the_final_set() {
    let tc = TangentChart::new(&["x", "y"]).unwrap();
    let mut s = Sampler::new(2);
    let l = ex("v_x^2/2 + y");
    let sys = LagrangianSystem::build(l.clone(), &tc, &mut s).unwrap();
    let run = lagrangian_chain(&sys, 10, &mut s).unwrap();
    assert_eq!(run.chain.status, ChainStatus::EmptyFinalSet);
    assert_eq!(sets(&run.chain.generations), sets(&oracle::chain(&l, tc.q_names(), tc.v_names(), 10)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// `½ v_x² + (a x + b y) v_y − (c x² + d y²)/2` with small integer
    /// coefficients: singular in `v_y` for every choice.
    #[test]
    fn gauge_family_matches_oracle(a in -2i64..=2, b in -2i64..=2, c in -2i64..=2, d in -2i64..=2) {
        let tc = TangentChart::new(&["x", "y"]).unwrap();
        let l = ex(&format!("v_x^2/2 + ({a}*x + {b}*y)*v_y - ({c}*x^2 + {d}*y^2)/2"));
        let mut s = Sampler::new(3);
        check(&l, &tc, &mut s);
    }

    /// A degenerate kinetic term `½ (v_x + k v_y)²` with a linear potential.
    #[test]
    fn relative_velocity_family_matches_oracle(k in 1i64..=3, e in -2i64..=2, f in -2i64..=2) {
        let tc = TangentChart::new(&["x", "y"]).unwrap();
        let l = ex(&format!("(v_x + {k}*v_y)^2/2 - {e}*x - {f}*y"));
        let mut s = Sampler::new(4);
        check(&l, &tc, &mut s);
    }
}

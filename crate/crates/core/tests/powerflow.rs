use std::f64::consts::TAU;

use torusflow::flows::{solve_all, SolveOptions, SolverContext};
use torusflow::graph::CycleBasis;
use torusflow::powerflow::{builtin_case, case_to_problem, ptc, sweep, Bus, PowerCase};
use torusflow::Error;

/// Largest `sin d1 + sin d2` with `k1 d1 - k2 d2 = 2pi u` and `|d1|, |d2| <= gamma`.
fn two_path_ptc(k1: f64, k2: f64, u: i64, gamma: f64) -> Option<f64> {
    let d1 = |d2: f64| (TAU * u as f64 + k2 * d2) / k1;
    let lo = ((-k1 * gamma - TAU * u as f64) / k2).max(-gamma);
    let hi = ((k1 * gamma - TAU * u as f64) / k2).min(gamma);
    if lo > hi {
        return None;
    }
    let p = |d2: f64| d1(d2).sin() + d2.sin();
    let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
    for i in 0..=20_000 {
        let x = lo + (hi - lo) * i as f64 / 20_000.0;
        if p(x) > best {
            (best, arg) = (p(x), x);
        }
    }
    let w = (hi - lo) / 20_000.0;
    let (mut a, mut b) = ((arg - w).max(lo), (arg + w).min(hi));
    for _ in 0..200 {
        let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
        if p(m1) < p(m2) {
            a = m1;
        } else {
            b = m2;
        }
    }
    Some(p((a + b) / 2.0).max(best))
}

#[test]
fn ring_ptc_matches_two_path_oracle() {
    for gamma in [1.2, 1.5] {
        for (name, k1, k2) in [("ring12-asym", 3.0, 9.0), ("ring12-sym", 6.0, 6.0)] {
            let (problem, _) = case_to_problem::<f64>(&builtin_case(name).unwrap(), gamma).unwrap();
            let basis = CycleBasis::fundamental(problem.graph()).unwrap();
            let ctx = SolverContext::new(problem, basis).unwrap();
            for r in sweep(&ctx, 1e-7, 1e-10, 2).unwrap() {
                let oracle = two_path_ptc(k1, k2, r.u[0], gamma).unwrap().max(0.0);
                let got = r.ptc.unwrap_or(0.0);
                assert!((got - oracle).abs() < 1e-4, "{name} gamma {gamma} u {:?}: {got} vs {oracle}", r.u);
                assert!(r.bracket.1 - r.bracket.0 <= 1e-7);
            }
        }
    }
}

#[test]
fn congestion_curve_is_consistent() {
    let (problem, _) = case_to_problem::<f64>(&builtin_case("ring12-asym").unwrap(), 1.5).unwrap();
    let basis = CycleBasis::fundamental(problem.graph()).unwrap();
    let ctx = SolverContext::new(problem, basis).unwrap();
    let p_hat = ctx.problem().external_p();
    let r = ptc(&ctx, &p_hat, &[-1], 1e-6, 1e-10).unwrap();
    let cap = r.ptc.unwrap();
    for c in &r.curve {
        assert_eq!(c.exists, c.scale <= cap + 1e-6, "{c:?}");
        if c.exists {
            assert!(c.congestion <= 1.5f64.sin() + 1e-9);
        }
    }
}

#[test]
fn expo_family_has_power_of_three_solutions() {
    for s in 1..=4 {
        let name = format!("expo({s})");
        let (problem, _) = case_to_problem::<f64>(&builtin_case(&name).unwrap(), 1.4).unwrap();
        assert_eq!(problem.graph().n(), 4 * s + 1);
        assert_eq!(problem.graph().m(), 5 * s);
        let out = solve_all(&problem, SolveOptions { jobs: 4, ..SolveOptions::default() }).unwrap();
        assert_eq!(out.solutions.len(), 3usize.pow(s as u32), "{name}");
    }
}

#[test]
fn case_injections_are_rebalanced_in_per_unit() {
    let case = PowerCase {
        base_mva: Some(100.0),
        buses: vec![Bus { v: 1.0, p: 50.0 }, Bus { v: 1.02, p: -20.0 }, Bus { v: 0.98, p: -29.9 }],
        branches: vec![(0, 1, 10.0), (1, 2, 8.0), (2, 0, 12.0)],
    };
    let (problem, rebalance) = case_to_problem::<f64>(&case, 1.2).unwrap();
    assert!((rebalance.imbalance - 0.001).abs() < 1e-12);
    assert!(problem.p().iter().sum::<f64>().abs() < 1e-12);
    assert!((problem.graph().weights()[0] - 10.2).abs() < 1e-12);

    let skewed = PowerCase { buses: vec![Bus { v: 1.0, p: 50.0 }, Bus { v: 1.0, p: -40.0 }, Bus { v: 1.0, p: 0.0 }], ..case };
    assert!(matches!(case_to_problem::<f64>(&skewed, 1.2), Err(Error::Input(_))));
    assert!(matches!(case_to_problem::<f64>(&builtin_case("pentagon").unwrap(), 1.6), Err(Error::Gamma(_))));
}

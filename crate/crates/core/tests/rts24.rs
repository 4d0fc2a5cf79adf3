//! Runs only when `TORUSFLOW_RTS24_CASE` points at a case JSON with the
//! 24-bus branch susceptances and voltage magnitudes.

use std::path::PathBuf;

use torusflow::flows::{solve_with_basis, SolveOptions};
use torusflow::powerflow::{builtin_gamma, case_to_problem, rts24_basis, rts24_mod};

#[test]
fn modified_rts24_has_two_solutions() {
    let Some(path) = std::env::var_os("TORUSFLOW_RTS24_CASE").map(PathBuf::from) else {
        eprintln!("TORUSFLOW_RTS24_CASE not set; skipping");
        return;
    };
    let case = rts24_mod(Some(&path)).unwrap();
    let (problem, _) = case_to_problem::<f64>(&case, builtin_gamma("rts24-mod")).unwrap();
    let basis = rts24_basis(problem.graph()).unwrap();
    let out = solve_with_basis(&problem, basis, SolveOptions { jobs: 8, ..SolveOptions::default() }).unwrap();
    let us: Vec<Vec<i64>> = out.solutions.iter().map(|s| s.u.u.clone()).collect();
    let mut last = vec![0; 11];
    last[10] = -1;
    assert_eq!(us, vec![last, vec![0; 11]]);
}

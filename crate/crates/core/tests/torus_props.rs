use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;
use torusflow::gen::{random_graph, rng};
use torusflow::graph::{CycleBasis, WeightedGraph};
use torusflow::torus::{
    edge_differences, polytope_to_torus, torus_to_polytope, winding_number_raw, winding_vector,
    winding_vector_of_differences, PhaseVector, WindingPolytope,
};

fn graph(seed: u64, n: usize, extra: usize) -> WeightedGraph<f64> {
    random_graph(&mut rng(seed), n, extra, true).build().unwrap()
}

fn phases(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed ^ 0x5eed);
    (0..n).map(|_| r.gen_range(-PI..PI)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn windings_are_bounded_integers(seed in any::<u64>(), n in 3usize..10, extra in 1usize..8) {
        let g = graph(seed, n, extra);
        let theta = phases(seed, n);
        let delta = edge_differences(&g, &theta).unwrap();
        for basis in [CycleBasis::fundamental(&g).unwrap(), CycleBasis::minimum(&g).unwrap()] {
            for c in basis.cycles() {
                let raw = winding_number_raw(c, &delta);
                prop_assert!((raw - raw.round()).abs() < 1e-9);
                let bound = c.len().div_ceil(2) - 1;
                prop_assert!(raw.round().abs() as usize <= bound);
            }
        }
    }

    #[test]
    fn winding_is_rotation_invariant(seed in any::<u64>(), n in 3usize..9, s in -10.0f64..10.0) {
        let g = graph(seed, n, 4);
        let basis = CycleBasis::fundamental(&g).unwrap();
        let theta = PhaseVector::new(phases(seed, n));
        let a = winding_vector(&g, &basis, theta.as_slice()).unwrap();
        let b = winding_vector(&g, &basis, theta.rotated(s).as_slice());
        // Rotation can push a difference onto the excluded antipode only through rounding.
        if let Ok(b) = b {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn polytope_coordinates_round_trip(seed in any::<u64>(), n in 3usize..9, extra in 1usize..6) {
        let g = graph(seed, n, extra);
        let theta = PhaseVector::new(phases(seed, n));
        for basis in [CycleBasis::fundamental(&g).unwrap(), CycleBasis::minimum(&g).unwrap()] {
            let (x, u) = torus_to_polytope(&g, &basis, theta.as_slice()).unwrap();
            let poly = WindingPolytope::<f64>::new(&basis, &u.u).unwrap();
            prop_assert!(poly.contains(&g, &x));
            let back = polytope_to_torus(&g, &basis, &x, &u.u).unwrap();
            prop_assert!(back.distance_mod_rotation(&theta) < 1e-9);
        }
    }

    #[test]
    fn minimum_basis_is_no_longer_than_fundamental(seed in any::<u64>(), n in 3usize..11, extra in 1usize..10) {
        let g = graph(seed, n, extra);
        let f = CycleBasis::fundamental(&g).unwrap();
        let m = CycleBasis::minimum(&g).unwrap();
        prop_assert_eq!(m.len(), g.cycle_rank());
        prop_assert!(m.total_length() <= f.total_length());
        let rebuilt = CycleBasis::from_cycles(&g, m.cycles().to_vec()).unwrap();
        prop_assert_eq!(rebuilt.len(), m.len());
    }
}

/// Edge order (0,1), (1,2), (1,3), (3,0), (2,3): the fundamental cycles
/// share the diagonal (1,3).
#[test]
fn square_with_diagonal_never_winds_both_ways() {
    let g = WeightedGraph::<f64>::unweighted(4, &[(0, 1), (1, 2), (1, 3), (3, 0), (2, 3)]).unwrap();
    let basis = CycleBasis::fundamental(&g).unwrap();
    assert_eq!(basis.cycles()[0].nodes(), [0, 1, 3]);
    assert_eq!(basis.cycles()[1].nodes(), [1, 2, 3]);
    let mut r = rng(33);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..50_000 {
        let theta: Vec<f64> = (0..4).map(|_| r.gen_range(-PI..PI)).collect();
        let delta = edge_differences(&g, &theta).unwrap();
        let u = winding_vector_of_differences(&basis, &delta).unwrap();
        assert!(u != [1, 1] && u != [-1, -1], "{theta:?}");
        seen.insert(u);
    }
    assert!(seen.contains(&vec![1, -1]) && seen.contains(&vec![-1, 1]));
}

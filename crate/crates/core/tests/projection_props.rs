use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use rand::Rng;
use torusflow::gen::{random_graph, rng};
use torusflow::graph::cycle_projection;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_identities(seed in any::<u64>(), n in 2usize..=12, extra in 0usize..12) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, n, extra, true).build::<f64>().unwrap();
        let d: Vec<f64> = (0..g.m()).map(|_| r.gen_range(0.01..5.0)).collect();
        let p = cycle_projection(&g, &d).unwrap().matrix;
        let b = g.incidence_matrix();
        let mut dabt = b.transpose();
        for (e, (x, a)) in d.iter().zip(g.weights()).enumerate() {
            dabt.row_mut(e).scale_mut(x * a);
        }
        prop_assert!((&p * &p - &p).amax() < 1e-10);
        prop_assert!((p.trace() - g.cycle_rank() as f64).abs() < 1e-8);
        prop_assert!((&b * &p).amax() < 1e-10);
        prop_assert!((&p * &dabt).amax() < 1e-10);
    }

    /// With `D = I` and unit weights the projection is orthogonal, so its
    /// spectrum is `{0, 1}` with multiplicity `m - n + 1` for 1.
    #[test]
    fn unweighted_projection_is_orthogonal(seed in any::<u64>(), n in 2usize..=10, extra in 0usize..8) {
        let g = random_graph(&mut rng(seed), n, extra, false).build::<f64>().unwrap();
        let p = cycle_projection(&g, &vec![1.0; g.m()]).unwrap().matrix;
        prop_assert!((&p - p.transpose()).amax() < 1e-10);
        let eig = SymmetricEigen::new(p.clone()).eigenvalues;
        let ones = eig.iter().filter(|&&l| (l - 1.0).abs() < 1e-8).count();
        prop_assert!(eig.iter().all(|&l| l.abs() < 1e-8 || (l - 1.0).abs() < 1e-8));
        prop_assert_eq!(ones, g.cycle_rank());
    }
}

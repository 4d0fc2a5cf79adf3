//! Seeded random instances for testing and benchmarking.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::FlowFamily;
use crate::io::{GraphSpec, ProblemSpec};

/// Shape of a generated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenOptions {
    pub nodes: usize,
    /// Edges added on top of a random spanning tree.
    pub extra_edges: usize,
    pub gamma: f64,
    /// `max_i |p_i|` of the generated injections.
    pub p_scale: f64,
    /// Draw weights from `[0.5, 2]` instead of using 1.
    pub weighted: bool,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self { nodes: 6, extra_edges: 3, gamma: 1.4, p_scale: 0.1, weighted: false }
    }
}

/// The generator's RNG; fixed algorithm so seeds reproduce across platforms.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn weight<R: Rng>(rng: &mut R, weighted: bool) -> f64 {
    if weighted {
        rng.gen_range(0.5..2.0)
    } else {
        1.0
    }
}

/// Random tree: node `k` attaches to a uniformly chosen earlier node.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize, weighted: bool) -> GraphSpec {
    let edges = (1..n)
        .map(|k| {
            let parent = rng.gen_range(0..k);
            let w = weight(rng, weighted);
            if rng.gen_bool(0.5) {
                (k, parent, w)
            } else {
                (parent, k, w)
            }
        })
        .collect();
    GraphSpec { n, edges }
}

/// Random connected simple graph: a random tree plus up to `extra` chords.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, extra: usize, weighted: bool) -> GraphSpec {
    let mut spec = random_tree(rng, n, weighted);
    let mut used: BTreeSet<(usize, usize)> = spec.edges.iter().map(|&(i, j, _)| (i.min(j), i.max(j))).collect();
    let room = n * n.saturating_sub(1) / 2 - used.len();
    for _ in 0..extra.min(room) {
        loop {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i != j && used.insert((i.min(j), i.max(j))) {
                let w = weight(rng, weighted);
                spec.edges.push((i, j, w));
                break;
            }
        }
    }
    spec
}

/// Balanced injections with `max |p_i| = scale`.
pub fn random_injections<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = p.iter().sum::<f64>() / n as f64;
    p.iter_mut().for_each(|x| *x -= mean);
    let top = p.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if top > 0.0 {
        p.iter_mut().for_each(|x| *x *= scale / top);
    }
    p
}

/// Sine flow problem on a random connected graph.
pub fn random_problem(seed: u64, options: &GenOptions) -> Result<ProblemSpec> {
    if options.nodes < 2 {
        return Err(Error::Input(format!("need at least 2 nodes, got {}", options.nodes)));
    }
    if !(options.p_scale >= 0.0) {
        return Err(Error::Input(format!("injection scale {} must be non-negative", options.p_scale)));
    }
    let mut rng = rng(seed);
    let graph = random_graph(&mut rng, options.nodes, options.extra_edges, options.weighted);
    let p = random_injections(&mut rng, options.nodes, options.p_scale);
    let spec = ProblemSpec { graph, flow: FlowFamily::Sin, p, gamma: options.gamma };
    spec.build::<f64>()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_problem() {
        let o = GenOptions { weighted: true, ..GenOptions::default() };
        assert_eq!(random_problem(7, &o).unwrap(), random_problem(7, &o).unwrap());
        assert_ne!(random_problem(7, &o).unwrap(), random_problem(8, &o).unwrap());
    }

    #[test]
    fn graphs_are_connected_and_simple() {
        let mut r = rng(1);
        for n in 2..12 {
            let spec = random_graph(&mut r, n, 100, false);
            assert_eq!(spec.edges.len(), n * (n - 1) / 2);
            let g = spec.build::<f64>().unwrap();
            assert!(g.laplacian_pinv().is_ok());
            let t = random_tree(&mut r, n, true);
            assert!(t.build::<f64>().unwrap().is_acyclic());
        }
    }

    #[test]
    fn injections_balanced_and_scaled() {
        let p = random_injections(&mut rng(3), 9, 0.25);
        assert!(p.iter().sum::<f64>().abs() < 1e-15);
        assert!((p.iter().fold(0.0f64, |a, &b| a.max(b.abs())) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_options() {
        assert!(random_problem(0, &GenOptions { nodes: 1, ..GenOptions::default() }).is_err());
        assert!(random_problem(0, &GenOptions { gamma: 4.0, ..GenOptions::default() }).is_err());
    }
}

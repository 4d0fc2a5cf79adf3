use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A simple cycle given by its node sequence (closing node not repeated)
/// and its signed cycle vector.
///
/// Walking the sequence, the step `a -> b` over edge `e = (i, j)` contributes
/// `wrap(theta_b - theta_a)` to the winding sum. Since `(B^T theta)_e` is
/// `wrap(theta_i - theta_j)`, the signed vector holds `+1` where the walk goes
/// from `j` to `i` and `-1` where it follows the edge orientation `i -> j`.
/// With this choice `v^T (B^T theta) / 2pi` is exactly the winding number of
/// the walk.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cycle {
    nodes: Vec<usize>,
    signed: Vec<i8>,
}

impl Cycle {
    /// Builds a cycle from a closed walk. A trailing copy of the first node is
    /// accepted and dropped.
    pub fn from_nodes<T: Scalar>(graph: &WeightedGraph<T>, nodes: &[usize]) -> Result<Self> {
        let mut seq = nodes.to_vec();
        if seq.len() > 1 && seq.first() == seq.last() {
            seq.pop();
        }
        if seq.len() < 3 {
            return Err(Error::Input(format!("cycle {nodes:?} has fewer than 3 nodes")));
        }
        let mut distinct = HashSet::new();
        if !seq.iter().all(|v| distinct.insert(*v)) {
            return Err(Error::Input(format!("cycle {nodes:?} repeats a node")));
        }
        let mut signed = vec![0i8; graph.m()];
        for k in 0..seq.len() {
            let (a, b) = (seq[k], seq[(k + 1) % seq.len()]);
            let e = graph.edge_between(a, b).ok_or_else(|| {
                Error::Input(format!("cycle {nodes:?} uses missing edge ({a}, {b})"))
            })?;
            signed[e] = if graph.edges()[e].0 == a { -1 } else { 1 };
        }
        Ok(Self { nodes: seq, signed })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Number of nodes (equivalently edges) on the cycle.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn signed_vector(&self) -> &[i8] {
        &self.signed
    }

    /// `v^T x` for an edge vector `x`.
    pub fn dot<T: Scalar>(&self, x: &[T]) -> T {
        self.signed
            .iter()
            .zip(x)
            .filter(|(s, _)| **s != 0)
            .fold(T::zero(), |acc, (&s, &v)| if s > 0 { acc + v } else { acc - v })
    }

    /// Winding bound `ceil(n_sigma / 2) - 1` valid on the punctured torus.
    pub fn max_winding(&self) -> i64 {
        self.len().div_ceil(2) as i64 - 1
    }

    fn rotated_to_min(mut self) -> Self {
        let start = (0..self.nodes.len()).min_by_key(|&k| self.nodes[k]).unwrap_or(0);
        self.nodes.rotate_left(start);
        self
    }

    fn reversed<T: Scalar>(&self, graph: &WeightedGraph<T>) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Cycle::from_nodes(graph, &nodes).expect("reversal of a valid cycle")
    }

    fn edge_bits(&self) -> Vec<u64> {
        let mut bits = vec![0u64; self.signed.len().div_ceil(64)];
        for (e, &s) in self.signed.iter().enumerate() {
            if s != 0 {
                bits[e / 64] |= 1 << (e % 64);
            }
        }
        bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Fundamental,
    Minimum,
    Custom,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::Fundamental => "fundamental",
            BasisKind::Minimum => "minimum",
            BasisKind::Custom => "custom",
        })
    }
}

/// A basis of the cycle space: `m - n + 1` cycles with independent signed
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleBasis {
    cycles: Vec<Cycle>,
    kind: BasisKind,
    tree_edges: Option<Vec<usize>>,
    /// Non-tree edge owned by each cycle of a fundamental basis.
    owned_edges: Option<Vec<usize>>,
    n: usize,
    m: usize,
}

impl CycleBasis {
    /// One cycle per non-tree edge of [`WeightedGraph::spanning_tree`]. Each
    /// cycle walks its non-tree edge along the edge orientation and closes
    /// through the tree.
    pub fn fundamental<T: Scalar>(graph: &WeightedGraph<T>) -> Result<Self> {
        if graph.is_acyclic() {
            return Err(Error::AcyclicGraph);
        }
        let tree = graph.spanning_tree();
        let mut cycles = Vec::with_capacity(graph.cycle_rank());
        let mut owned = Vec::with_capacity(graph.cycle_rank());
        for (e, &(i, j)) in graph.edges().iter().enumerate() {
            if tree.contains(e) {
                continue;
            }
            let mut nodes = vec![i];
            nodes.extend(tree.path(j, i).into_iter().take_while(|&v| v != i));
            cycles.push(Cycle::from_nodes(graph, &nodes)?.rotated_to_min());
            owned.push(e);
        }
        Ok(Self {
            cycles,
            kind: BasisKind::Fundamental,
            tree_edges: Some(tree.edges().to_vec()),
            owned_edges: Some(owned),
            n: graph.n(),
            m: graph.m(),
        })
    }

    /// Minimum-length basis by Horton's method: candidate cycles from
    /// breadth-first shortest paths, filtered greedily for GF(2) independence.
    pub fn minimum<T: Scalar>(graph: &WeightedGraph<T>) -> Result<Self> {
        if graph.is_acyclic() {
            return Err(Error::AcyclicGraph);
        }
        let mut seen = HashSet::new();
        let mut candidates = Vec::new();
        for root in 0..graph.n() {
            let (parent, dist) = bfs_tree(graph, root);
            let path_to_root = |mut v: usize| {
                let mut p = vec![v];
                while let Some((u, _)) = parent[v] {
                    p.push(u);
                    v = u;
                }
                p
            };
            for (e, &(x, y)) in graph.edges().iter().enumerate() {
                if parent[x].map(|(_, pe)| pe) == Some(e) || parent[y].map(|(_, pe)| pe) == Some(e) {
                    continue;
                }
                let px = path_to_root(x);
                let py = path_to_root(y);
                let on_x: HashSet<usize> = px.iter().copied().collect();
                if py.iter().filter(|v| on_x.contains(v)).count() != 1 {
                    continue;
                }
                // root -> ... -> x -> y -> ... -> root
                let mut nodes: Vec<usize> = px.into_iter().rev().collect();
                nodes.extend(py.into_iter().take(dist[y] + 1).take_while(|&v| v != root));
                let cycle = Cycle::from_nodes(graph, &nodes)?;
                if seen.insert(cycle.edge_bits()) {
                    candidates.push(cycle);
                }
            }
        }
        candidates.sort_by_key(Cycle::len);

        let target = graph.cycle_rank();
        let mut eliminator = Gf2Eliminator::new(graph.m());
        let mut cycles = Vec::with_capacity(target);
        for cycle in candidates {
            if eliminator.insert(cycle.edge_bits()) {
                let cycle = cycle.rotated_to_min();
                let cycle = if cycle.nodes[1] > *cycle.nodes.last().unwrap() {
                    cycle.reversed(graph).rotated_to_min()
                } else {
                    cycle
                };
                cycles.push(cycle);
                if cycles.len() == target {
                    break;
                }
            }
        }
        if cycles.len() != target {
            return Err(Error::Rank { expected: target, found: cycles.len() });
        }
        Ok(Self {
            cycles,
            kind: BasisKind::Minimum,
            tree_edges: None,
            owned_edges: None,
            n: graph.n(),
            m: graph.m(),
        })
    }

    /// Wraps user-supplied cycles, checking that they form a basis.
    pub fn from_cycles<T: Scalar>(graph: &WeightedGraph<T>, cycles: Vec<Cycle>) -> Result<Self> {
        if cycles.len() != graph.cycle_rank() {
            return Err(Error::Rank { expected: graph.cycle_rank(), found: cycles.len() });
        }
        if cycles.iter().any(|c| c.signed.len() != graph.m()) {
            return Err(Error::Input("cycle built for a different graph".into()));
        }
        let basis = Self {
            cycles,
            kind: BasisKind::Custom,
            tree_edges: None,
            owned_edges: None,
            n: graph.n(),
            m: graph.m(),
        };
        let rank = basis.rank();
        if rank != graph.cycle_rank() {
            return Err(Error::Rank { expected: graph.cycle_rank(), found: rank });
        }
        Ok(basis)
    }

    /// Builds the basis of the requested kind.
    pub fn of_kind<T: Scalar>(graph: &WeightedGraph<T>, kind: BasisKind) -> Result<Self> {
        match kind {
            BasisKind::Fundamental => Self::fundamental(graph),
            BasisKind::Minimum => Self::minimum(graph),
            BasisKind::Custom => Err(Error::Input("custom bases are built with from_cycles".into())),
        }
    }

    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    /// Sum of cycle lengths.
    pub fn total_length(&self) -> usize {
        self.cycles.iter().map(Cycle::len).sum()
    }

    pub fn tree_edges(&self) -> Option<&[usize]> {
        self.tree_edges.as_deref()
    }

    /// The cycle-edge matrix `C`, one signed cycle vector per row.
    pub fn cycle_edge_matrix<T: Scalar>(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.len(), self.m, |r, e| T::lit(self.cycles[r].signed[e] as f64))
    }

    fn rank(&self) -> usize {
        let c = self.cycle_edge_matrix::<f64>();
        let sv = c.singular_values();
        let top = sv.max();
        sv.iter().filter(|&&s| s > 1e-8 * top.max(1.0)).count()
    }

    /// Right pseudoinverse `C^T (C C^T)^{-1}` of the cycle-edge matrix.
    pub fn cycle_edge_pinv<T: Scalar>(&self) -> Result<DMatrix<T>> {
        let k = self.len();
        let rank = self.rank();
        if rank < k {
            return Err(Error::Rank { expected: k, found: rank });
        }
        let c = self.cycle_edge_matrix::<T>();
        let gram = &c * c.transpose();
        let chol = gram.cholesky().ok_or(Error::Rank { expected: k, found: rank })?;
        Ok(c.transpose() * chol.inverse())
    }

    /// Integer solution of `C z = u` supported on the non-tree edges. Only
    /// defined for fundamental bases.
    pub fn integer_shift_solve(&self, u: &[i64]) -> Result<Vec<i64>> {
        let owned = self.owned_edges.as_ref().ok_or(Error::BasisKind)?;
        if u.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: u.len() });
        }
        let mut z = vec![0i64; self.m];
        for ((cycle, &e), &ui) in self.cycles.iter().zip(owned).zip(u) {
            z[e] = cycle.signed[e] as i64 * ui;
        }
        Ok(z)
    }

    /// Integer solution of `C z = u` for any basis, routed through the
    /// fundamental basis `F` of `graph` via the change of basis `C_F = R C`.
    pub fn integer_shift_solve_any<T: Scalar>(
        &self,
        graph: &WeightedGraph<T>,
        u: &[i64],
    ) -> Result<Vec<i64>> {
        if self.owned_edges.is_some() {
            return self.integer_shift_solve(u);
        }
        if u.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), found: u.len() });
        }
        let fundamental = Self::fundamental(graph)?;
        let r = fundamental.cycle_edge_matrix::<f64>() * self.cycle_edge_pinv::<f64>()?;
        let uf = nalgebra::DVector::from_iterator(u.len(), u.iter().map(|&x| x as f64));
        let shifted = r * uf;
        let mut rounded = Vec::with_capacity(shifted.len());
        for (i, &x) in shifted.iter().enumerate() {
            let k = x.round();
            if (x - k).abs() > 1e-6 {
                return Err(Error::NonIntegerWinding { cycle: i, raw: x });
            }
            rounded.push(k as i64);
        }
        fundamental.integer_shift_solve(&rounded)
    }

    /// Stable identifier of the basis: FNV-1a over the cycle node sequences.
    pub fn fingerprint(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        for cycle in &self.cycles {
            for &v in &cycle.nodes {
                feed(v as u64);
            }
            feed(u64::MAX);
        }
        format!("{h:016x}")
    }
}

fn bfs_tree<T: Scalar>(
    graph: &WeightedGraph<T>,
    root: usize,
) -> (Vec<Option<(usize, usize)>>, Vec<usize>) {
    let mut parent = vec![None; graph.n()];
    let mut dist = vec![usize::MAX; graph.n()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    (parent, dist)
}

/// Incremental Gaussian elimination over GF(2) on bit rows.
struct Gf2Eliminator {
    rows: Vec<(usize, Vec<u64>)>,
    width: usize,
}

impl Gf2Eliminator {
    fn new(width: usize) -> Self {
        Self { rows: Vec::new(), width }
    }

    /// Reduces `bits` against the stored rows; keeps it if independent.
    fn insert(&mut self, mut bits: Vec<u64>) -> bool {
        for (pivot, row) in &self.rows {
            if bits[pivot / 64] >> (pivot % 64) & 1 == 1 {
                bits.iter_mut().zip(row).for_each(|(a, b)| *a ^= b);
            }
        }
        match (0..self.width).find(|&k| bits[k / 64] >> (k % 64) & 1 == 1) {
            Some(pivot) => {
                // keep the stored rows fully reduced on the new pivot
                for (_, row) in self.rows.iter_mut() {
                    if row[pivot / 64] >> (pivot % 64) & 1 == 1 {
                        row.iter_mut().zip(&bits).for_each(|(a, b)| *a ^= b);
                    }
                }
                self.rows.push((pivot, bits));
                true
            }
            None => false,
        }
    }
}

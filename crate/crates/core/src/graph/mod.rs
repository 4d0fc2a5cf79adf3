//! Weighted-graph algebra: incidence and Laplacian matrices, spanning trees,
//! cycle bases, and the weighted cycle projection.

mod basis;
mod projection;

pub use basis::{BasisKind, Cycle, CycleBasis};
pub use projection::{cycle_projection, CycleProjection};

use std::collections::{HashSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Connected undirected graph with oriented, ordered, positively weighted
/// edges. Edge `e = (i, j)` contributes `x_i - x_j` to `B^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<T>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Builds a graph from `(i, j, weight)` triples, validating every
    /// structural invariant.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut seen = HashSet::new();
        let mut pairs = Vec::new();
        let mut weights = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for (e, (i, j, w)) in edges.into_iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {e} = ({i}, {j}) references a node outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("edge {e} is a self-loop at node {i}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::InvalidGraph(format!("edge {e} = ({i}, {j}) is a duplicate")));
            }
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::Weight { edge: e });
            }
            adjacency[i].push((j, e));
            adjacency[j].push((i, e));
            pairs.push((i, j));
            weights.push(w);
        }
        let graph = Self { n, edges: pairs, weights, adjacency };
        if let Some(node) = graph.unreachable_node() {
            return Err(Error::Singularity { node });
        }
        Ok(graph)
    }

    /// Unit-weight graph from oriented node pairs.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(i, j)| (i, j, T::one())))
    }

    fn unreachable_node(&self) -> Option<usize> {
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(w, _) in &self.adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
        visited.iter().position(|&v| !v)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Neighbours of `node` as `(neighbour, edge index)` pairs, in edge order.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    /// Dimension of the cycle space, `m - n + 1`.
    pub fn cycle_rank(&self) -> usize {
        self.m() + 1 - self.n
    }

    pub fn is_acyclic(&self) -> bool {
        self.cycle_rank() == 0
    }

    /// Index of the edge joining `i` and `j` (either orientation).
    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        self.adjacency
            .get(i)?
            .iter()
            .find(|&&(w, _)| w == j)
            .map(|&(_, e)| e)
    }

    /// The `n x m` incidence matrix: `+1` at the first node of each edge and
    /// `-1` at the second.
    pub fn incidence_matrix(&self) -> DMatrix<T> {
        let mut b = DMatrix::zeros(self.n, self.m());
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            b[(i, e)] = T::one();
            b[(j, e)] = -T::one();
        }
        b
    }

    /// `B^T x`, i.e. `x_i - x_j` per edge.
    pub fn differences(&self, x: &[T]) -> DVector<T> {
        DVector::from_iterator(self.m(), self.edges.iter().map(|&(i, j)| x[i] - x[j]))
    }

    /// `B f`, the net outflow at every node.
    pub fn divergence(&self, f: &[T]) -> DVector<T> {
        let mut out = DVector::zeros(self.n);
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            out[i] += f[e];
            out[j] -= f[e];
        }
        out
    }

    /// `B diag(scale) B^T`.
    pub fn scaled_laplacian(&self, scale: &[T]) -> DMatrix<T> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            let w = scale[e];
            l[(i, i)] += w;
            l[(j, j)] += w;
            l[(i, j)] -= w;
            l[(j, i)] -= w;
        }
        l
    }

    /// The weighted Laplacian `L = B A B^T`.
    pub fn laplacian(&self) -> DMatrix<T> {
        self.scaled_laplacian(&self.weights)
    }

    /// Moore-Penrose pseudoinverse of the weighted Laplacian.
    pub fn laplacian_pinv(&self) -> Result<DMatrix<T>> {
        deflated_pinv(&self.laplacian())
    }

    /// Pseudoinverse of the unweighted Laplacian `B B^T`.
    pub fn unweighted_laplacian_pinv(&self) -> Result<DMatrix<T>> {
        deflated_pinv(&self.scaled_laplacian(&vec![T::one(); self.m()]))
    }

    /// Spanning tree grown from node 0: the edge list is swept in input
    /// order, repeatedly, and every edge with exactly one endpoint already in
    /// the tree is added.
    pub fn spanning_tree(&self) -> SpanningTree {
        let mut in_tree = vec![false; self.n];
        in_tree[0] = true;
        let mut tree_edges = Vec::with_capacity(self.n - 1);
        let mut parent = vec![None; self.n];
        loop {
            let mut grew = false;
            for (e, &(i, j)) in self.edges.iter().enumerate() {
                let (inside, outside) = match (in_tree[i], in_tree[j]) {
                    (true, false) => (i, j),
                    (false, true) => (j, i),
                    _ => continue,
                };
                in_tree[outside] = true;
                parent[outside] = Some((inside, e));
                tree_edges.push(e);
                grew = true;
            }
            if !grew || tree_edges.len() + 1 == self.n {
                break;
            }
        }
        debug_assert_eq!(tree_edges.len() + 1, self.n);
        let mut depth = vec![0usize; self.n];
        // parents were discovered before children, so a pass in discovery order works
        for &e in &tree_edges {
            let (i, j) = self.edges[e];
            let child = if parent[j].map(|(_, pe)| pe) == Some(e) { j } else { i };
            let (p, _) = parent[child].expect("tree edge has a child");
            depth[child] = depth[p] + 1;
        }
        SpanningTree { edges: tree_edges, parent, depth }
    }
}

/// Spanning tree rooted at node 0, with parent pointers for path queries.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    edges: Vec<usize>,
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
}

impl SpanningTree {
    /// Tree edge indices in the order they were added.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.contains(&edge)
    }

    /// The unique tree path from `a` to `b`, as a node sequence including
    /// both endpoints.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let (mut x, mut y) = (a, b);
        let mut from_a = vec![x];
        let mut from_b = vec![y];
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].expect("non-root has a parent").0;
            from_a.push(x);
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].expect("non-root has a parent").0;
            from_b.push(y);
        }
        while x != y {
            x = self.parent[x].expect("non-root has a parent").0;
            y = self.parent[y].expect("non-root has a parent").0;
            from_a.push(x);
            from_b.push(y);
        }
        from_b.pop();
        from_a.extend(from_b.into_iter().rev());
        from_a
    }
}

/// Pseudoinverse of a connected-graph Laplacian by deflating its known
/// nullspace `span{1}`: `(L + J/n)^{-1} - J/n`.
pub fn deflated_pinv<T: Scalar>(laplacian: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = laplacian.nrows();
    let shift = T::one() / T::lit(n as f64);
    let shifted = laplacian.map(|x| x + shift);
    let chol = shifted.cholesky().ok_or(Error::Singularity { node: 0 })?;
    Ok(chol.inverse().map(|x| x - shift))
}

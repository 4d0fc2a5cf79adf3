//! Geometry of the n-torus: wrapped differences, winding numbers, winding
//! polytopes, and enumeration of feasible winding vectors.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Cycle, CycleBasis, WeightedGraph};
use crate::scalar::{inf_norm, Scalar};

/// Distance from `-pi` below which a wrapped difference counts as the
/// puncture.
const BOUNDARY_TOL: f64 = 1e-12;
/// Tolerance when rounding raw winding numbers.
const WINDING_TOL: f64 = 1e-6;

/// `mod(x + pi, 2pi) - pi`, the representative of `x` in `[-pi, pi)`.
pub fn wrap<T: Scalar>(x: T) -> T {
    let pi = T::pi();
    let two_pi = T::two_pi();
    let shifted = x + pi;
    let r = shifted - two_pi * (shifted / two_pi).floor() - pi;
    if r >= pi {
        r - two_pi
    } else {
        r
    }
}

/// Counterclockwise difference `wrap(alpha - beta)`.
pub fn ccw_difference<T: Scalar>(alpha: T, beta: T) -> T {
    wrap(alpha - beta)
}

fn boundary_tol<T: Scalar>() -> T {
    T::lit(BOUNDARY_TOL).max(T::eps() * T::lit(16.0))
}

/// Angles in canonical form `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseVector<T: Scalar> {
    theta: Vec<T>,
}

impl<T: Scalar> PhaseVector<T> {
    pub fn new(theta: impl IntoIterator<Item = T>) -> Self {
        Self { theta: theta.into_iter().map(wrap).collect() }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Uniform rotation by `s`.
    pub fn rotated(&self, s: T) -> Self {
        Self::new(self.theta.iter().map(|&t| t + s))
    }

    /// Rotation representative with `theta_0 = 0`.
    pub fn grounded(&self) -> Self {
        match self.theta.first() {
            Some(&t0) => self.rotated(-t0),
            None => self.clone(),
        }
    }

    /// Largest wrapped distance to `other` after grounding both.
    pub fn distance_mod_rotation(&self, other: &Self) -> T {
        let a = self.grounded();
        let b = other.grounded();
        a.theta
            .iter()
            .zip(&b.theta)
            .fold(T::zero(), |acc, (&x, &y)| acc.max(wrap(x - y).abs()))
    }

    pub fn into_vec(self) -> Vec<T> {
        self.theta
    }
}

/// `delta_e = wrap(theta_i - theta_j)`, rejecting points off the punctured
/// torus.
pub fn edge_differences<T: Scalar>(graph: &WeightedGraph<T>, theta: &[T]) -> Result<Vec<T>> {
    if theta.len() != graph.n() {
        return Err(Error::Dimension { expected: graph.n(), found: theta.len() });
    }
    let tol = boundary_tol::<T>();
    graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| {
            let d = ccw_difference(theta[i], theta[j]);
            if T::pi() - d.abs() < tol {
                Err(Error::PuncturedTorus { edge: e, diff: d.as_f64() })
            } else {
                Ok(d)
            }
        })
        .collect()
}

/// `v^T delta / 2pi` before rounding.
pub fn winding_number_raw<T: Scalar>(cycle: &Cycle, delta: &[T]) -> T {
    cycle.dot(delta) / T::two_pi()
}

fn round_winding<T: Scalar>(index: usize, raw: T) -> Result<i64> {
    let k = raw.round();
    if (raw - k).abs() > T::lit(WINDING_TOL) {
        return Err(Error::NonIntegerWinding { cycle: index, raw: raw.as_f64() });
    }
    Ok(k.as_f64() as i64)
}

/// Winding number of `theta` along `cycle`.
pub fn winding_number<T: Scalar>(graph: &WeightedGraph<T>, cycle: &Cycle, theta: &[T]) -> Result<i64> {
    let delta = edge_differences(graph, theta)?;
    round_winding(0, winding_number_raw(cycle, &delta))
}

/// Integer winding vector tagged with the fingerprint of its basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindingVector {
    pub u: Vec<i64>,
    pub basis: String,
}

impl WindingVector {
    pub fn new(basis: &CycleBasis, u: Vec<i64>) -> Self {
        Self { u, basis: basis.fingerprint() }
    }
}

/// Winding vector from precomputed edge differences.
pub fn winding_vector_of_differences<T: Scalar>(basis: &CycleBasis, delta: &[T]) -> Result<Vec<i64>> {
    basis
        .cycles()
        .iter()
        .enumerate()
        .map(|(k, c)| round_winding(k, winding_number_raw(c, delta)))
        .collect()
}

/// Componentwise winding numbers of `theta` over the basis.
pub fn winding_vector<T: Scalar>(
    graph: &WeightedGraph<T>,
    basis: &CycleBasis,
    theta: &[T],
) -> Result<WindingVector> {
    let delta = edge_differences(graph, theta)?;
    Ok(WindingVector::new(basis, winding_vector_of_differences(basis, &delta)?))
}

/// Per-cycle bound `floor(gamma n_sigma / 2pi)`.
pub fn winding_bounds(basis: &CycleBasis, gamma: f64) -> Vec<i64> {
    basis
        .cycles()
        .iter()
        .map(|c| (gamma * c.len() as f64 / std::f64::consts::TAU).floor().max(0.0) as i64)
        .collect()
}

/// Every `u` with `|u_i| <= floor(gamma n_sigma_i / 2pi)`, in lexicographic
/// order.
pub fn feasible_winding_vectors(basis: &CycleBasis, gamma: f64) -> WindingBox {
    WindingBox::new(winding_bounds(basis, gamma))
}

/// Lexicographic iterator over an integer box `[-b_i, b_i]`.
#[derive(Debug, Clone)]
pub struct WindingBox {
    bounds: Vec<i64>,
    next: Option<Vec<i64>>,
}

impl WindingBox {
    pub fn new(bounds: Vec<i64>) -> Self {
        let next = Some(bounds.iter().map(|b| -b).collect());
        Self { bounds, next }
    }

    /// Number of vectors in the box.
    pub fn count_total(&self) -> u128 {
        self.bounds.iter().map(|&b| 2 * b as u128 + 1).product()
    }
}

impl Iterator for WindingBox {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for k in (0..succ.len()).rev() {
            if succ[k] < self.bounds[k] {
                succ[k] += 1;
                self.next = Some(succ);
                break;
            }
            succ[k] = -self.bounds[k];
        }
        Some(current)
    }
}

/// The open polytope `{x perp 1 : |B^T x + 2pi C^+ u|_inf < pi}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingPolytope<T: Scalar> {
    pub u: Vec<i64>,
    pub offset: Vec<T>,
}

impl<T: Scalar> WindingPolytope<T> {
    pub fn new(basis: &CycleBasis, u: &[i64]) -> Result<Self> {
        if u.len() != basis.len() {
            return Err(Error::Dimension { expected: basis.len(), found: u.len() });
        }
        let cp = basis.cycle_edge_pinv::<T>()?;
        let uv = DVector::from_iterator(u.len(), u.iter().map(|&k| T::lit(k as f64)));
        let offset = (cp * uv * T::two_pi()).data.into();
        Ok(Self { u: u.to_vec(), offset })
    }

    /// `B^T x + 2pi C^+ u`.
    pub fn differences(&self, graph: &WeightedGraph<T>, x: &[T]) -> Vec<T> {
        graph
            .differences(x)
            .iter()
            .zip(&self.offset)
            .map(|(&d, &o)| d + o)
            .collect()
    }

    /// Membership with the orthogonality check at `1e-9` scaled by `n`.
    pub fn contains(&self, graph: &WeightedGraph<T>, x: &[T]) -> bool {
        self.check(graph, x).is_ok()
    }

    fn check(&self, graph: &WeightedGraph<T>, x: &[T]) -> Result<()> {
        if x.len() != graph.n() {
            return Err(Error::Dimension { expected: graph.n(), found: x.len() });
        }
        let sum = x.iter().fold(T::zero(), |a, &b| a + b);
        let tol = T::lit(1e-9).max(T::eps() * T::lit(64.0)) * T::lit(graph.n() as f64);
        if sum.abs() > tol * (T::one() + inf_norm(x)) {
            return Err(Error::PolytopeMembership(format!("x is not orthogonal to 1 (sum {sum:e})")));
        }
        let d = inf_norm(&self.differences(graph, x));
        if d >= T::pi() - boundary_tol::<T>() {
            return Err(Error::PolytopeMembership(format!(
                "|B^T x + 2pi C^+ u|_inf = {d:e} is not below pi"
            )));
        }
        Ok(())
    }
}

/// Coordinates `(x, u)` of a point of the punctured torus.
pub fn torus_to_polytope<T: Scalar>(
    graph: &WeightedGraph<T>,
    basis: &CycleBasis,
    theta: &[T],
) -> Result<(Vec<T>, WindingVector)> {
    let delta = edge_differences(graph, theta)?;
    let u = winding_vector_of_differences(basis, &delta)?;
    let poly = WindingPolytope::<T>::new(basis, &u)?;
    let rhs: Vec<T> = delta.iter().zip(&poly.offset).map(|(&d, &o)| d - o).collect();
    let b = graph.incidence_matrix();
    let x = graph.unweighted_laplacian_pinv()? * (&b * DVector::from_vec(rhs));
    Ok((x.data.into(), WindingVector::new(basis, u)))
}

/// Inverse of [`torus_to_polytope`], defined up to a uniform rotation.
pub fn polytope_to_torus<T: Scalar>(
    graph: &WeightedGraph<T>,
    basis: &CycleBasis,
    x: &[T],
    u: &[i64],
) -> Result<PhaseVector<T>> {
    let poly = WindingPolytope::<T>::new(basis, u)?;
    poly.check(graph, x)?;
    let z = basis.integer_shift_solve_any(graph, u)?;
    let shift: Vec<T> = z
        .iter()
        .zip(&poly.offset)
        .map(|(&k, &o)| T::lit(k as f64) - o / T::two_pi())
        .collect();
    let b = graph.incidence_matrix();
    let alpha = graph.unweighted_laplacian_pinv()? * (&b * DVector::from_vec(shift));
    Ok(PhaseVector::new(x.iter().zip(alpha.iter()).map(|(&xi, &a)| xi - T::two_pi() * a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ring(n: usize) -> WeightedGraph<f64> {
        let edges: Vec<_> = (0..n).map(|k| (k, (k + 1) % n)).collect();
        WeightedGraph::unweighted(n, &edges).unwrap()
    }

    fn splay(n: usize) -> Vec<f64> {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    #[test]
    fn ccw_examples() {
        assert!((ccw_difference(PI / 3.0, 0.0) - PI / 3.0).abs() < 1e-15);
        assert_eq!(ccw_difference(1.234, 1.234), 0.0);
        assert!((ccw_difference(-3.0 * PI / 4.0, 3.0 * PI / 4.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap(PI), -PI);
        assert!(wrap(-PI) == -PI);
    }

    #[test]
    fn triangle_differences_and_windings() {
        let g = ring(3);
        let basis = CycleBasis::fundamental(&g).unwrap();
        let phi = [0.0, PI / 3.0, 2.0 * PI / 3.0];
        let d = edge_differences(&g, &phi).unwrap();
        for (a, b) in d.iter().zip([-PI / 3.0, -PI / 3.0, 2.0 * PI / 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(winding_number(&g, &basis.cycles()[0], &phi).unwrap(), 0);
        let psi = splay(3);
        assert_eq!(winding_number(&g, &basis.cycles()[0], &psi).unwrap(), 1);
    }

    #[test]
    fn pentagon_splay_winds_once() {
        let g = ring(5);
        let basis = CycleBasis::fundamental(&g).unwrap();
        assert_eq!(winding_vector(&g, &basis, &splay(5)).unwrap().u, vec![1]);
    }

    #[test]
    fn puncture_is_rejected() {
        let g = ring(3);
        assert!(matches!(
            edge_differences(&g, &[0.0, PI, 0.5]),
            Err(Error::PuncturedTorus { edge: 0, .. })
        ));
    }

    #[test]
    fn enumeration_boxes() {
        let g = ring(5);
        let basis = CycleBasis::fundamental(&g).unwrap();
        let all: Vec<_> = feasible_winding_vectors(&basis, 1.4).collect();
        assert_eq!(all, vec![vec![-1], vec![0], vec![1]]);
        assert_eq!(feasible_winding_vectors(&basis, 0.0).collect::<Vec<_>>(), vec![vec![0]]);
        let ring12 = CycleBasis::fundamental(&ring(12)).unwrap();
        assert_eq!(winding_bounds(&ring12, PI / 2.0), vec![3]);
        let sq = WeightedGraph::<f64>::unweighted(4, &[(0, 1), (1, 2), (1, 3), (3, 0), (2, 3)]).unwrap();
        let sqb = CycleBasis::fundamental(&sq).unwrap();
        let it = feasible_winding_vectors(&sqb, 2.5);
        assert_eq!(it.count_total(), 9);
        let v: Vec<_> = it.collect();
        assert_eq!(v.first(), Some(&vec![-1, -1]));
        assert_eq!(v[1], vec![-1, 0]);
        assert_eq!(v.len(), 9);
    }

    #[test]
    fn splay_maps_to_polytope_origin() {
        let g = ring(5);
        let basis = CycleBasis::fundamental(&g).unwrap();
        let (x, u) = torus_to_polytope(&g, &basis, &splay(5)).unwrap();
        assert_eq!(u.u, vec![1]);
        assert!(inf_norm(&x) < 1e-12);
        let back = polytope_to_torus(&g, &basis, &[0.0; 5], &[1]).unwrap();
        assert!(back.distance_mod_rotation(&PhaseVector::new(splay(5))) < 1e-12);
    }

    #[test]
    fn polytope_membership_is_checked() {
        let g = ring(5);
        let basis = CycleBasis::fundamental(&g).unwrap();
        let bad = [1.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            polytope_to_torus(&g, &basis, &bad, &[0]),
            Err(Error::PolytopeMembership(_))
        ));
    }
}

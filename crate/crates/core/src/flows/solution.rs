use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::problem::FlowNetworkProblem;
use crate::error::Result;
use crate::graph::{Cycle, CycleBasis, WeightedGraph};
use crate::scalar::{inf_norm, Scalar};
use crate::torus::{edge_differences, winding_number_raw, PhaseVector, WindingVector};

/// Certification thresholds for returned solutions.
pub const BALANCE_TOL: f64 = 1e-8;
pub const PHYSICS_TOL: f64 = 1e-8;
pub const MARGIN_TOL: f64 = 1e-9;

/// Residuals and diagnostics attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    /// `|B f - p|_inf`.
    pub balance_residual: f64,
    /// `max_e |f_e - a_e h_e(delta_e)|`.
    pub physics_residual: f64,
    /// `gamma - max_e |delta_e|`.
    pub constraint_margin: f64,
    /// Largest distance of a raw winding number from its integer.
    pub winding_deviation: f64,
    /// Whether the recomputed winding vector equals the claimed one.
    pub winding_match: bool,
    /// Some edge sits within the feasibility slack of its capacity.
    pub boundary: bool,
    pub loop_flows: Vec<f64>,
    pub iterations: usize,
    pub final_step: f64,
    pub rate: f64,
}

impl SolutionReport {
    pub fn certified(&self) -> bool {
        self.balance_residual < BALANCE_TOL
            && self.physics_residual < PHYSICS_TOL
            && self.constraint_margin >= -MARGIN_TOL
            && self.winding_match
    }

    /// Names of the failed checks.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.balance_residual < BALANCE_TOL) {
            out.push(format!("balance residual {:e}", self.balance_residual));
        }
        if !(self.physics_residual < PHYSICS_TOL) {
            out.push(format!("physics residual {:e}", self.physics_residual));
        }
        if !(self.constraint_margin >= -MARGIN_TOL) {
            out.push(format!("angle constraint margin {:e}", self.constraint_margin));
        }
        if !self.winding_match {
            out.push("winding vector mismatch".into());
        }
        out
    }
}

/// A certified pair `(f, theta)` with its winding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T: Scalar> {
    pub u: WindingVector,
    pub f: Vec<T>,
    pub theta: PhaseVector<T>,
    pub report: SolutionReport,
}

/// Independent residual computation for `(f, theta)` in the caller's
/// convention. `basis` is `None` for acyclic graphs.
pub fn verify<T: Scalar>(
    problem: &FlowNetworkProblem<T>,
    basis: Option<&CycleBasis>,
    u: &[i64],
    f: &[T],
    theta: &[T],
    boundary_slack: T,
) -> Result<SolutionReport> {
    let graph = problem.graph();
    let delta = edge_differences(graph, theta)?;
    let p = problem.external_p();
    let bf = graph.divergence(f);
    let balance: Vec<T> = bf.iter().zip(&p).map(|(&a, &b)| a - b).collect();
    let physical = problem.physical_flow(&delta);
    let physics: Vec<T> = f.iter().zip(&physical).map(|(&a, &b)| a - b).collect();
    let max_delta = inf_norm(&delta);
    let capacities = problem.capacities();
    let boundary = f.iter().zip(&capacities).any(|(&x, &c)| c - x.abs() <= boundary_slack);

    let (deviation, matches, loops) = match basis {
        Some(basis) => {
            let mut dev = 0.0f64;
            let mut ok = u.len() == basis.len();
            for (k, c) in basis.cycles().iter().enumerate() {
                let raw = winding_number_raw(c, &delta).as_f64();
                dev = dev.max((raw - raw.round()).abs());
                ok &= u.get(k).is_some_and(|&uk| uk as f64 == raw.round());
            }
            let loops = basis.cycles().iter().map(|c| loop_flow(c, f).as_f64()).collect();
            (dev, ok, loops)
        }
        None => (0.0, u.is_empty(), Vec::new()),
    };
    Ok(SolutionReport {
        balance_residual: inf_norm(&balance).as_f64(),
        physics_residual: inf_norm(&physics).as_f64(),
        constraint_margin: (problem.gamma() - max_delta).as_f64(),
        winding_deviation: deviation,
        winding_match: matches,
        boundary,
        loop_flows: loops,
        iterations: 0,
        final_step: 0.0,
        rate: problem.rate().as_f64(),
    })
}

/// Loop flow `v_sigma^T f`.
pub fn loop_flow<T: Scalar>(cycle: &Cycle, f: &[T]) -> T {
    cycle.dot(f)
}

/// Unique split `f = f_cut + f_cyc` with `f_cut = A B^T L^+ (B f)` and
/// `B f_cyc = 0`.
pub fn decompose_flow<T: Scalar>(graph: &WeightedGraph<T>, f: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let cut = cutset_flow(graph, graph.divergence(f).as_slice())?;
    let cyc = f.iter().zip(&cut).map(|(&a, &b)| a - b).collect();
    Ok((cut, cyc))
}

/// `A B^T L^+ p`.
pub fn cutset_flow<T: Scalar>(graph: &WeightedGraph<T>, p: &[T]) -> Result<Vec<T>> {
    let x = graph.laplacian_pinv()? * DVector::from_column_slice(p);
    Ok(graph
        .differences(x.as_slice())
        .iter()
        .zip(graph.weights())
        .map(|(&d, &a)| a * d)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_of_pure_cycle_and_cut_flows() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 0, 1.5), (0, 2, 1.0)])
            .unwrap();
        let basis = CycleBasis::fundamental(&g).unwrap();
        let v: Vec<f64> = basis.cycles()[0].signed_vector().iter().map(|&s| s as f64).collect();
        let (cut, cyc) = decompose_flow(&g, &v).unwrap();
        assert!(inf_norm(&cut) < 1e-12);
        assert!(cyc.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-12));

        let grad: Vec<f64> =
            g.differences(&[0.3, -1.0, 2.0, 0.1]).iter().zip(g.weights()).map(|(d, a)| d * a).collect();
        let (cut, cyc) = decompose_flow(&g, &grad).unwrap();
        assert!(inf_norm(&cyc) < 1e-12);
        assert!(cut.iter().zip(&grad).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn loop_flow_of_zero() {
        let g = WeightedGraph::<f64>::unweighted(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let basis = CycleBasis::fundamental(&g).unwrap();
        assert_eq!(loop_flow(&basis.cycles()[0], &[0.0; 3]), 0.0);
    }
}

//! Elastic network problems, solved through their equivalent flow problem
//! with `h_e = H_e'` and `p = tau`.

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{solve_all, FlowFunction, FlowNetworkProblem, SolveOptions, SolveOutput};
use crate::graph::WeightedGraph;
use crate::scalar::Scalar;
use crate::torus::{edge_differences, PhaseVector};

/// Even, 2pi-periodic, twice differentiable edge energy `H_e` with its
/// analytic derivatives.
pub trait ElasticEnergy<T: Scalar>: Debug + Send + Sync {
    fn energy(&self, y: T) -> T;
    fn derivative(&self, y: T) -> T;
    fn second_derivative(&self, y: T) -> T;
    fn label(&self) -> String;
}

/// `H(y) = 1 - cos y`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SpacingPotential;

impl<T: Scalar> ElasticEnergy<T> for SpacingPotential {
    fn energy(&self, y: T) -> T {
        T::one() - y.cos()
    }

    fn derivative(&self, y: T) -> T {
        y.sin()
    }

    fn second_derivative(&self, y: T) -> T {
        y.cos()
    }

    fn label(&self) -> String {
        "spacing".into()
    }
}

/// `H(y) = sum_k c_k (1 - cos(k y)) / k`, whose derivative is the sine series
/// with the same coefficients.
#[derive(Debug, Clone)]
pub struct CosineSeries<T> {
    pub coeffs: Vec<T>,
}

impl<T: Scalar> ElasticEnergy<T> for CosineSeries<T> {
    fn energy(&self, y: T) -> T {
        self.coeffs.iter().enumerate().fold(T::zero(), |acc, (k, &c)| {
            let kk = T::lit(k as f64 + 1.0);
            acc + c * (T::one() - (kk * y).cos()) / kk
        })
    }

    fn derivative(&self, y: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (k, &c)| acc + c * (T::lit(k as f64 + 1.0) * y).sin())
    }

    fn second_derivative(&self, y: T) -> T {
        self.coeffs.iter().enumerate().fold(T::zero(), |acc, (k, &c)| {
            let kk = T::lit(k as f64 + 1.0);
            acc + c * kk * (kk * y).cos()
        })
    }

    fn label(&self) -> String {
        let c: Vec<String> = self.coeffs.iter().map(|c| format!("{c:e}")).collect();
        format!("cosine-series[{}]", c.join(","))
    }
}

/// Built-in energy families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum EnergyFamily {
    Spacing,
    Custom { coeffs: Vec<f64> },
}

impl EnergyFamily {
    pub fn build<T: Scalar>(&self) -> Result<Arc<dyn ElasticEnergy<T>>> {
        Ok(match self {
            EnergyFamily::Spacing => Arc::new(SpacingPotential),
            EnergyFamily::Custom { coeffs } => {
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::FlowFunction("energy series needs finite coefficients".into()));
                }
                Arc::new(CosineSeries { coeffs: coeffs.iter().map(|&c| T::lit(c)).collect() })
            }
        })
    }
}

/// `h = H'` viewed as a flow function.
#[derive(Debug, Clone)]
pub struct EnergyFlow<T: Scalar>(pub Arc<dyn ElasticEnergy<T>>);

impl<T: Scalar> FlowFunction<T> for EnergyFlow<T> {
    fn eval(&self, y: T) -> T {
        self.0.derivative(y)
    }

    fn derivative(&self, y: T) -> T {
        self.0.second_derivative(y)
    }

    fn label(&self) -> String {
        format!("d/dy {}", self.0.label())
    }
}

/// Checks evenness and that the supplied derivative matches central
/// differences of the energy on `[-gamma, gamma]`.
pub fn check_energy<T: Scalar>(h: &dyn ElasticEnergy<T>, gamma: T) -> Result<()> {
    let even_tol = T::lit(1e-12).max(T::eps() * T::lit(64.0));
    let fd_tol = T::lit(1e-6).max(T::eps().sqrt() * T::lit(16.0));
    let step = T::lit(1e-5).max(T::eps().cbrt());
    for y in crate::flows::grid(gamma.max(T::lit(1e-3))) {
        let (a, b) = (h.energy(y), h.energy(-y));
        if (a - b).abs() > even_tol * (T::one() + a.abs()) {
            return Err(Error::FlowFunction(format!("{} is not even at y = {:e}", h.label(), y.as_f64())));
        }
        let fd = (h.energy(y + step) - h.energy(y - step)) / (step + step);
        let d = h.derivative(y);
        if (fd - d).abs() > fd_tol * (T::one() + d.abs()) {
            return Err(Error::FlowFunction(format!(
                "{}: derivative {:e} disagrees with finite difference {:e} at y = {:e}",
                h.label(),
                d.as_f64(),
                fd.as_f64(),
                y.as_f64()
            )));
        }
    }
    Ok(())
}

/// Elastic network problem `(G, {H_e}, tau, gamma)`.
#[derive(Debug, Clone)]
pub struct ElasticProblem<T: Scalar> {
    graph: WeightedGraph<T>,
    energies: Vec<Arc<dyn ElasticEnergy<T>>>,
    tau: Vec<T>,
    gamma: T,
}

impl<T: Scalar> ElasticProblem<T> {
    pub fn new(
        graph: WeightedGraph<T>,
        energies: Vec<Arc<dyn ElasticEnergy<T>>>,
        tau: Vec<T>,
        gamma: T,
    ) -> Result<Self> {
        if energies.len() != graph.m() {
            return Err(Error::Dimension { expected: graph.m(), found: energies.len() });
        }
        if tau.len() != graph.n() {
            return Err(Error::Dimension { expected: graph.n(), found: tau.len() });
        }
        for h in &energies {
            check_energy(h.as_ref(), gamma)?;
        }
        Ok(Self { graph, energies, tau, gamma })
    }

    pub fn uniform(graph: WeightedGraph<T>, h: Arc<dyn ElasticEnergy<T>>, tau: Vec<T>, gamma: T) -> Result<Self> {
        let energies = vec![h; graph.m()];
        Self::new(graph, energies, tau, gamma)
    }

    pub fn graph(&self) -> &WeightedGraph<T> {
        &self.graph
    }

    pub fn tau(&self) -> &[T] {
        &self.tau
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// The equivalent flow network problem.
    pub fn flow_problem(&self) -> Result<FlowNetworkProblem<T>> {
        let flows = self
            .energies
            .iter()
            .map(|h| Arc::new(EnergyFlow(h.clone())) as Arc<dyn FlowFunction<T>>)
            .collect();
        FlowNetworkProblem::new(self.graph.clone(), flows, self.tau.clone(), self.gamma)
    }
}

/// `sum_e a_e H_e(delta_e)`.
pub fn energy<T: Scalar>(problem: &ElasticProblem<T>, theta: &[T]) -> Result<T> {
    let delta = edge_differences(&problem.graph, theta)?;
    Ok(delta
        .iter()
        .zip(problem.graph.weights())
        .zip(&problem.energies)
        .fold(T::zero(), |acc, ((&d, &a), h)| acc + a * h.energy(d)))
}

/// `dH/dtheta_i = sum_j a_ij h_e(theta_i - theta_j)`, i.e. `B (a h(delta))`.
pub fn gradient<T: Scalar>(problem: &ElasticProblem<T>, theta: &[T]) -> Result<Vec<T>> {
    let delta = edge_differences(&problem.graph, theta)?;
    let f: Vec<T> = delta
        .iter()
        .zip(problem.graph.weights())
        .zip(&problem.energies)
        .map(|((&d, &a), h)| a * h.derivative(d))
        .collect();
    Ok(problem.graph.divergence(&f).data.into())
}

/// Critical points with `grad H(theta) = tau` and all `|delta_e| <= gamma`,
/// grounded at node 0.
pub fn solve_elastic<T: Scalar>(problem: &ElasticProblem<T>, options: SolveOptions) -> Result<Vec<PhaseVector<T>>> {
    Ok(solve_elastic_full(problem, options)?.solutions.into_iter().map(|s| s.theta).collect())
}

/// Like [`solve_elastic`] but keeps the flow-side certificates.
pub fn solve_elastic_full<T: Scalar>(problem: &ElasticProblem<T>, options: SolveOptions) -> Result<SolveOutput<T>> {
    solve_all(&problem.flow_problem()?, options)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn pentagon() -> ElasticProblem<f64> {
        let g = WeightedGraph::unweighted(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        ElasticProblem::uniform(g, Arc::new(SpacingPotential), vec![0.0; 5], 1.4).unwrap()
    }

    fn splay() -> Vec<f64> {
        (0..5).map(|k| 2.0 * PI * k as f64 / 5.0).collect()
    }

    #[test]
    fn energy_examples() {
        let pr = pentagon();
        assert_eq!(energy(&pr, &[0.0; 5]).unwrap(), 0.0);
        let e = energy(&pr, &splay()).unwrap();
        assert!((e - 5.0 * (1.0 - (2.0 * PI / 5.0).cos())).abs() < 1e-12);
        let rotated: Vec<f64> = splay().iter().map(|t| t + 0.7).collect();
        assert!((energy(&pr, &rotated).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn splay_is_critical() {
        let g = gradient(&pentagon(), &splay()).unwrap();
        assert!(g.iter().all(|x| x.abs() < 1e-12));
        assert!(gradient(&pentagon(), &[0.0; 5]).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn three_critical_points_on_pentagon() {
        let sols = solve_elastic(&pentagon(), SolveOptions::default()).unwrap();
        assert_eq!(sols.len(), 3);
    }

    #[test]
    fn tree_has_unique_critical_point() {
        let g = WeightedGraph::unweighted(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let pr = ElasticProblem::uniform(g, Arc::new(SpacingPotential), vec![0.0; 4], 1.0).unwrap();
        let sols = solve_elastic(&pr, SolveOptions::default()).unwrap();
        assert_eq!(sols.len(), 1);
        assert!(sols[0].as_slice().iter().all(|x: &f64| x.abs() < 1e-15));
    }

    #[test]
    fn inconsistent_derivative_is_refused() {
        #[derive(Debug)]
        struct Wrong;
        impl ElasticEnergy<f64> for Wrong {
            fn energy(&self, y: f64) -> f64 {
                1.0 - y.cos()
            }
            fn derivative(&self, y: f64) -> f64 {
                2.0 * y.sin()
            }
            fn second_derivative(&self, y: f64) -> f64 {
                2.0 * y.cos()
            }
            fn label(&self) -> String {
                "wrong".into()
            }
        }
        assert!(check_energy(&Wrong, 1.0).is_err());
        assert!(check_energy::<f64>(&SpacingPotential, 1.0).is_ok());
    }
}

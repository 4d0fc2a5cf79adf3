use std::sync::Arc;

use super::function::{check_odd, ExtendedFlowFunction, FlowFunction, Negated};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scalar::{inf_norm, Scalar};

/// Smallest admissible derivative lower bound.
pub const MIN_SLOPE: f64 = 1e-9;

/// Flow network problem `(G, {h_e}, p, gamma)`.
///
/// Decreasing flow functions are stored negated together with `-p`, so the
/// solver only sees increasing ones; [`FlowNetworkProblem::external_flow`]
/// maps flows back.
#[derive(Debug, Clone)]
pub struct FlowNetworkProblem<T: Scalar> {
    graph: WeightedGraph<T>,
    flows: Vec<ExtendedFlowFunction<T>>,
    p: Vec<T>,
    gamma: T,
    negated: bool,
    lmin: Vec<T>,
    lmax: Vec<T>,
}

impl<T: Scalar> FlowNetworkProblem<T> {
    pub fn new(
        graph: WeightedGraph<T>,
        flows: Vec<Arc<dyn FlowFunction<T>>>,
        p: Vec<T>,
        gamma: T,
    ) -> Result<Self> {
        if !(gamma >= T::zero() && gamma < T::pi()) {
            return Err(Error::Gamma(format!("gamma = {:e} must lie in [0, pi)", gamma.as_f64())));
        }
        if flows.len() != graph.m() {
            return Err(Error::Dimension { expected: graph.m(), found: flows.len() });
        }
        if p.len() != graph.n() {
            return Err(Error::Dimension { expected: graph.n(), found: p.len() });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("supply/demand vector has non-finite entries".into()));
        }
        let total = p.iter().fold(T::zero(), |a, &b| a + b);
        let tol = T::lit(1e-10).max(T::eps() * T::lit(64.0)) * (T::one() + inf_norm(&p));
        if total.abs() > tol {
            return Err(Error::Balance { residual: total.as_f64() });
        }

        let slopes: Vec<T> = flows.iter().map(|h| h.derivative(T::zero())).collect();
        let negated = slopes.iter().all(|&d| d < T::zero());
        if !negated && slopes.iter().any(|&d| d <= T::zero()) {
            return Err(Error::FlowFunction(
                "flow functions must be all increasing or all decreasing near 0".into(),
            ));
        }
        let (flows, p) = if negated {
            let flows: Vec<Arc<dyn FlowFunction<T>>> = flows
                .into_iter()
                .map(|h| Arc::new(Negated(h)) as Arc<dyn FlowFunction<T>>)
                .collect();
            (flows, p.iter().map(|&x| -x).collect())
        } else {
            (flows, p)
        };

        let mut lmin = Vec::with_capacity(flows.len());
        let mut lmax = Vec::with_capacity(flows.len());
        for (e, h) in flows.iter().enumerate() {
            check_odd(h.as_ref(), gamma)?;
            let (lo, hi) = h.derivative_bounds(gamma);
            if !(lo >= T::lit(MIN_SLOPE)) {
                return Err(Error::FlowFunction(format!(
                    "edge {e}: {} has min slope {:e} on [-gamma, gamma]; it must exceed {MIN_SLOPE:e} (try a smaller gamma)",
                    h.label(),
                    lo.as_f64()
                )));
            }
            lmin.push(lo);
            lmax.push(hi);
        }
        let flows = flows.into_iter().map(|h| ExtendedFlowFunction::new(h, gamma)).collect();
        Ok(Self { graph, flows, p, gamma, negated, lmin, lmax })
    }

    /// Same flow function on every edge.
    pub fn uniform(graph: WeightedGraph<T>, h: Arc<dyn FlowFunction<T>>, p: Vec<T>, gamma: T) -> Result<Self> {
        let flows = vec![h; graph.m()];
        Self::new(graph, flows, p, gamma)
    }

    pub fn graph(&self) -> &WeightedGraph<T> {
        &self.graph
    }

    pub fn flows(&self) -> &[ExtendedFlowFunction<T>] {
        &self.flows
    }

    /// Supply/demand in the increasing convention.
    pub fn p(&self) -> &[T] {
        &self.p
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn is_negated(&self) -> bool {
        self.negated
    }

    pub fn lmin(&self) -> &[T] {
        &self.lmin
    }

    pub fn lmax(&self) -> &[T] {
        &self.lmax
    }

    /// Contraction rate `|I - L_min L_max^{-1}|_inf`.
    pub fn rate(&self) -> T {
        self.lmin
            .iter()
            .zip(&self.lmax)
            .fold(T::zero(), |acc, (&lo, &hi)| acc.max(T::one() - lo / hi))
    }

    /// Edge capacities `a_e |h_e(gamma)|`.
    pub fn capacities(&self) -> Vec<T> {
        self.graph
            .weights()
            .iter()
            .zip(&self.flows)
            .map(|(&a, h)| a * h.capacity().abs())
            .collect()
    }

    /// Same problem with a different supply/demand vector, given in the
    /// caller's convention.
    pub fn with_p(&self, p: Vec<T>) -> Result<Self> {
        if p.len() != self.graph.n() {
            return Err(Error::Dimension { expected: self.graph.n(), found: p.len() });
        }
        let total = p.iter().fold(T::zero(), |a, &b| a + b);
        let tol = T::lit(1e-10).max(T::eps() * T::lit(64.0)) * (T::one() + inf_norm(&p));
        if total.abs() > tol {
            return Err(Error::Balance { residual: total.as_f64() });
        }
        let mut out = self.clone();
        out.p = if self.negated { p.iter().map(|&x| -x).collect() } else { p };
        Ok(out)
    }

    /// Maps an internal flow to the caller's convention.
    pub fn external_flow(&self, f: &[T]) -> Vec<T> {
        if self.negated {
            f.iter().map(|&x| -x).collect()
        } else {
            f.to_vec()
        }
    }

    /// `p` in the caller's convention.
    pub fn external_p(&self) -> Vec<T> {
        self.external_flow(&self.p)
    }

    /// `a_e h_e(delta_e)` in the caller's convention.
    pub fn physical_flow(&self, delta: &[T]) -> Vec<T> {
        let f: Vec<T> = self
            .graph
            .weights()
            .iter()
            .zip(&self.flows)
            .zip(delta)
            .map(|((&a, h), &d)| a * h.base().eval(d))
            .collect();
        self.external_flow(&f)
    }
}

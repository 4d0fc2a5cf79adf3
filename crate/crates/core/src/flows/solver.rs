use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::problem::FlowNetworkProblem;
use super::solution::{cutset_flow, verify, Solution};
use crate::error::{Error, Result};
use crate::graph::{cycle_projection, BasisKind, CycleBasis};
use crate::scalar::{inf_norm, Scalar};
use crate::torus::{feasible_winding_vectors, polytope_to_torus, PhaseVector, WindingVector};

/// Slack on the capacity constraint `|f_e| <= a_e |h_e(gamma)|`.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
/// Default stopping tolerance on `|f^(k) - f^(k-1)|_inf`.
pub const DEFAULT_RHO: f64 = 1e-10;
/// Extra iterations on top of the geometric bound.
const BUDGET_SLACK: usize = 10;

/// Trace of one projection-iteration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub final_step: f64,
    pub rate: f64,
    /// Analytic iteration bound; the run fails past twice this.
    pub budget: usize,
    pub feasible: bool,
    pub infeasible_edges: Vec<usize>,
    /// `|f^(k+1) - f^(k)|_inf` per iteration.
    pub steps: Vec<f64>,
    /// Same steps in the norm `|D^{-1/2} x|_2`, `D = L_min A`, where the map
    /// contracts with ratio `rate`.
    pub weighted_steps: Vec<f64>,
}

impl IterationReport {
    /// First `k` with `s_{k+1} > rate s_k + slack`, if any.
    pub fn contraction_violation(&self, slack: f64) -> Option<usize> {
        self.weighted_steps.windows(2).position(|w| {
            w[1] > (self.rate * w[0] + slack).max((self.rate + slack) * w[0])
        })
    }
}

/// Capacity check result.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T> {
    pub feasible: bool,
    /// `a_e |h_e(gamma)| - |f_e|` per edge.
    pub margins: Vec<T>,
    pub infeasible_edges: Vec<usize>,
    /// Some edge lies within the slack of its capacity.
    pub boundary: bool,
}

/// `|f_e| <= a_e |h_e(gamma)| + 1e-9` for every edge.
pub fn check_feasibility<T: Scalar>(problem: &FlowNetworkProblem<T>, f: &[T]) -> Feasibility<T> {
    let slack = T::lit(FEASIBILITY_SLACK);
    let margins: Vec<T> = problem
        .capacities()
        .iter()
        .zip(f)
        .map(|(&c, &x)| c - x.abs())
        .collect();
    let infeasible_edges: Vec<usize> =
        margins.iter().enumerate().filter(|(_, &m)| m < -slack).map(|(e, _)| e).collect();
    Feasibility {
        feasible: infeasible_edges.is_empty(),
        boundary: margins.iter().any(|&m| m <= slack),
        margins,
        infeasible_edges,
    }
}

/// Everything the projection iteration needs that does not depend on `u`.
#[derive(Debug, Clone)]
pub struct SolverContext<T: Scalar> {
    problem: FlowNetworkProblem<T>,
    basis: CycleBasis,
    cpinv: DMatrix<T>,
    /// `P_{L_min} L_min A`.
    step_matrix: DMatrix<T>,
    /// Diagonal of `L_min A`.
    weights: Vec<T>,
    start: Vec<T>,
    rate: T,
}

impl<T: Scalar> SolverContext<T> {
    pub fn new(problem: FlowNetworkProblem<T>, basis: CycleBasis) -> Result<Self> {
        let graph = problem.graph();
        if basis.edge_count() != graph.m() || basis.node_count() != graph.n() {
            return Err(Error::Input("cycle basis belongs to a different graph".into()));
        }
        let cpinv = basis.cycle_edge_pinv::<T>()?;
        let projection = cycle_projection(graph, problem.lmin())?;
        let weights: Vec<T> = problem.lmin().iter().zip(graph.weights()).map(|(&l, &a)| l * a).collect();
        let mut step_matrix = projection.matrix;
        for (e, &w) in weights.iter().enumerate() {
            step_matrix.column_mut(e).scale_mut(w);
        }
        let start = cutset_flow(graph, problem.p())?;
        let rate = problem.rate();
        Ok(Self { problem, basis, cpinv, step_matrix, weights, start, rate })
    }

    /// Context for the same graph, flows and basis with a new `p`, given in
    /// the caller's convention.
    pub fn with_p(&self, p: Vec<T>) -> Result<Self> {
        let problem = self.problem.with_p(p)?;
        let start = cutset_flow(problem.graph(), problem.p())?;
        Ok(Self { problem, start, ..self.clone() })
    }

    pub fn problem(&self) -> &FlowNetworkProblem<T> {
        &self.problem
    }

    pub fn basis(&self) -> &CycleBasis {
        &self.basis
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    /// The cutset flow `A B^T L^+ p`, the starting point of every run.
    pub fn start(&self) -> &[T] {
        &self.start
    }

    /// `2pi C^+ u`.
    pub fn offset(&self, u: &[i64]) -> Result<Vec<T>> {
        if u.len() != self.basis.len() {
            return Err(Error::Dimension { expected: self.basis.len(), found: u.len() });
        }
        let uv = DVector::from_iterator(u.len(), u.iter().map(|&k| T::lit(k as f64)));
        Ok((&self.cpinv * uv * T::two_pi()).data.into())
    }

    fn apply(&self, offset: &[T], f: &[T]) -> Vec<T> {
        let graph = self.problem.graph();
        let r = DVector::from_iterator(
            f.len(),
            f.iter()
                .zip(graph.weights())
                .zip(self.problem.flows())
                .zip(offset)
                .map(|(((&fe, &a), h), &o)| h.inverse(fe / a) - o),
        );
        let correction = &self.step_matrix * r;
        f.iter().zip(correction.iter()).map(|(&x, &c)| x - c).collect()
    }

    fn weighted_norm(&self, x: &[T]) -> T {
        x.iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&v, &w)| acc + v * v / w)
            .sqrt()
    }

    /// `T_u(f) = f - P_{L_min} L_min A (h_gamma^{-1}(A^{-1} f) - 2pi C^+ u)`.
    pub fn winding_fixed_point_map(&self, u: &[i64], f: &[T]) -> Result<Vec<T>> {
        if f.len() != self.problem.graph().m() {
            return Err(Error::Dimension { expected: self.problem.graph().m(), found: f.len() });
        }
        let bf = self.problem.graph().divergence(f);
        let residual = bf
            .iter()
            .zip(self.problem.p())
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        if !(residual < T::lit(1e-8)) {
            return Err(Error::Balance { residual: residual.as_f64() });
        }
        Ok(self.apply(&self.offset(u)?, f))
    }

    /// Projection iteration from the cutset flow.
    pub fn projection_iteration(&self, u: &[i64], rho: T) -> Result<(Vec<T>, IterationReport)> {
        self.iterate_from(u, self.start.clone(), rho)
    }

    /// Projection iteration from a balanced `f0`, stopping once
    /// `|f^(k) - f^(k-1)|_inf < rho`.
    pub fn iterate_from(&self, u: &[i64], f0: Vec<T>, rho: T) -> Result<(Vec<T>, IterationReport)> {
        if !(rho > T::zero()) {
            return Err(Error::Input(format!("tolerance rho = {:e} must be positive", rho.as_f64())));
        }
        let offset = self.offset(u)?;
        let max_weight = self.weights.iter().fold(T::zero(), |a, &b| a.max(b));
        let mut f = f0;
        let mut steps = Vec::new();
        let mut weighted = Vec::new();
        let mut budget = 0usize;
        loop {
            let next = self.apply(&offset, &f);
            let diff: Vec<T> = next.iter().zip(&f).map(|(&a, &b)| a - b).collect();
            let s_inf = inf_norm(&diff);
            let s_w = self.weighted_norm(&diff);
            if !s_inf.is_finite() {
                return Err(Error::ConvergenceBudget { budget, step: s_inf.as_f64() });
            }
            steps.push(s_inf.as_f64());
            weighted.push(s_w.as_f64());
            f = next;
            if steps.len() == 1 {
                budget = self.budget(s_w, max_weight, rho);
            }
            if s_inf < rho {
                break;
            }
            if steps.len() >= 2 * budget {
                return Err(Error::ConvergenceBudget { budget: 2 * budget, step: s_inf.as_f64() });
            }
        }
        let feas = check_feasibility(&self.problem, &f);
        let report = IterationReport {
            iterations: steps.len(),
            final_step: *steps.last().unwrap_or(&0.0),
            rate: self.rate.as_f64(),
            budget,
            feasible: feas.feasible,
            infeasible_edges: feas.infeasible_edges,
            steps,
            weighted_steps: weighted,
        };
        Ok((f, report))
    }

    /// Iterations after which `|step|_inf < rho` is guaranteed, plus slack.
    fn budget(&self, s0: T, max_weight: T, rho: T) -> usize {
        let target = rho / (max_weight.sqrt() * s0);
        let n = if s0 == T::zero() || target >= T::one() {
            0.0
        } else if self.rate <= T::zero() {
            1.0
        } else {
            (target.ln() / self.rate.ln()).as_f64().ceil()
        };
        n.min(1e9) as usize + 1 + BUDGET_SLACK
    }

    /// `theta* = L^+ B A (h_gamma^{-1}(A^{-1} f) - 2pi C^+ u)` mapped back to the
    /// torus through the winding polytope, grounded at node 0.
    pub fn recover_phases(&self, u: &[i64], f: &[T]) -> Result<PhaseVector<T>> {
        let feas = check_feasibility(&self.problem, f);
        if let Some(&edge) = feas.infeasible_edges.first() {
            return Err(Error::Feasibility { edge });
        }
        let graph = self.problem.graph();
        let offset = self.offset(u)?;
        let weighted: Vec<T> = f
            .iter()
            .zip(graph.weights())
            .zip(self.problem.flows())
            .zip(&offset)
            .map(|(((&fe, &a), h), &o)| a * (h.inverse(fe / a) - o))
            .collect();
        let x = graph.laplacian_pinv()? * graph.divergence(&weighted);
        Ok(polytope_to_torus(graph, &self.basis, x.as_slice(), u)?.grounded())
    }

    /// Runs the iteration for `u`; returns the certified solution when the
    /// fixed point is feasible.
    ///
    /// The phase error left by stopping at step `rho` is about `rho / l_min`,
    /// so the run stops at `rho * min(1, min_e l_min_e)` instead.
    pub fn solve_winding(&self, u: &[i64], rho: T) -> Result<(Option<Solution<T>>, IterationReport)> {
        let lmin = self.problem.lmin().iter().fold(T::one(), |a, &b| a.min(b));
        let (f, iteration) = self.projection_iteration(u, rho * lmin)?;
        if !iteration.feasible {
            return Ok((None, iteration));
        }
        let theta = self.recover_phases(u, &f)?;
        let f = self.problem.external_flow(&f);
        let mut report =
            verify(&self.problem, Some(&self.basis), u, &f, theta.as_slice(), T::lit(FEASIBILITY_SLACK))?;
        report.iterations = iteration.iterations;
        report.final_step = iteration.final_step;
        if !report.certified() {
            return Err(Error::Certification(format!(
                "winding vector {u:?}: {}",
                report.failures().join(", ")
            )));
        }
        let solution = Solution { u: WindingVector::new(&self.basis, u.to_vec()), f, theta, report };
        Ok((Some(solution), iteration))
    }
}

/// Options for [`solve_all`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub rho: f64,
    pub basis: BasisKind,
    /// Worker threads; `1` runs sequentially.
    pub jobs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { rho: DEFAULT_RHO, basis: BasisKind::Fundamental, jobs: 1 }
    }
}

/// Result of the complete solver.
#[derive(Debug, Clone)]
pub struct SolveOutput<T: Scalar> {
    /// Certified solutions in lexicographic winding-vector order.
    pub solutions: Vec<Solution<T>>,
    /// `None` for acyclic graphs.
    pub basis: Option<CycleBasis>,
    /// Number of winding vectors examined.
    pub candidates: usize,
    /// One report per candidate, same order.
    pub iterations: Vec<(Vec<i64>, IterationReport)>,
}

/// All solutions of the flow network problem: one projection iteration per
/// feasible winding vector, or the closed form on trees.
pub fn solve_all<T: Scalar>(problem: &FlowNetworkProblem<T>, options: SolveOptions) -> Result<SolveOutput<T>> {
    if options.jobs == 0 {
        return Err(Error::Input("parallelism must be at least 1".into()));
    }
    if problem.graph().is_acyclic() {
        let solutions = acyclic_solve(problem)?.into_iter().collect();
        return Ok(SolveOutput { solutions, basis: None, candidates: 1, iterations: Vec::new() });
    }
    let basis = CycleBasis::of_kind(problem.graph(), options.basis)?;
    solve_with_basis(problem, basis, options)
}

/// [`solve_all`] on a cyclic graph with a given basis, for example a custom
/// one.
pub fn solve_with_basis<T: Scalar>(
    problem: &FlowNetworkProblem<T>,
    basis: CycleBasis,
    options: SolveOptions,
) -> Result<SolveOutput<T>> {
    if options.jobs == 0 {
        return Err(Error::Input("parallelism must be at least 1".into()));
    }
    let ctx = SolverContext::new(problem.clone(), basis)?;
    let candidates: Vec<Vec<i64>> =
        feasible_winding_vectors(ctx.basis(), problem.gamma().as_f64()).collect();
    let rho = T::lit(options.rho);
    let run = |u: &Vec<i64>| ctx.solve_winding(u, rho);
    let results: Vec<Result<_>> = if options.jobs == 1 {
        candidates.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {} worker threads: {e}", options.jobs)))?;
        pool.install(|| candidates.par_iter().map(run).collect())
    };
    let mut solutions = Vec::new();
    let mut iterations = Vec::with_capacity(candidates.len());
    for (u, result) in candidates.iter().zip(results) {
        let (solution, report) = result?;
        solutions.extend(solution);
        iterations.push((u.clone(), report));
    }
    Ok(SolveOutput { solutions, candidates: candidates.len(), basis: Some(ctx.basis), iterations })
}

/// Closed-form solution on trees: `f = A B^T L^+ p`, unique when every edge
/// satisfies `|(B^T L^+ p)_e| <= |h_e(gamma)|`.
pub fn acyclic_solve<T: Scalar>(problem: &FlowNetworkProblem<T>) -> Result<Option<Solution<T>>> {
    let graph = problem.graph();
    if !graph.is_acyclic() {
        return Err(Error::CyclicGraph { cycles: graph.cycle_rank() });
    }
    let f = cutset_flow(graph, problem.p())?;
    if !check_feasibility(problem, &f).feasible {
        return Ok(None);
    }
    let y: Vec<T> = f
        .iter()
        .zip(graph.weights())
        .zip(problem.flows())
        .map(|((&fe, &a), h)| a * h.inverse(fe / a))
        .collect();
    let x = graph.laplacian_pinv()? * graph.divergence(&y);
    let theta = PhaseVector::new(x.iter().copied()).grounded();
    let f = problem.external_flow(&f);
    let report = verify(problem, None, &[], &f, theta.as_slice(), T::lit(FEASIBILITY_SLACK))?;
    if !report.certified() {
        return Err(Error::Certification(report.failures().join(", ")));
    }
    let u = WindingVector { u: Vec::new(), basis: "acyclic".into() };
    Ok(Some(Solution { u, f, theta, report }))
}

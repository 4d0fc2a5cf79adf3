use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{loop_flow, FlowNetworkProblem, SolverContext};
use crate::scalar::Scalar;
use crate::torus::feasible_winding_vectors;

/// Default bisection tolerance on the scale `P`.
pub const DEFAULT_PTC_TOL: f64 = 1e-6;
/// Points on each congestion curve.
pub const CURVE_POINTS: usize = 20;

/// One sampled point of a congestion curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub scale: f64,
    pub exists: bool,
    /// `max_e |f_e / a_e|` of the fixed point (meaningful when `exists`).
    pub congestion: f64,
    pub loop_flows: Vec<f64>,
}

/// PTC and congestion curve for one winding vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub u: Vec<i64>,
    /// Largest scale with a solution, `None` if none exists even at `P = 0`.
    pub ptc: Option<f64>,
    /// Bracket `[lo, hi]` with existence at `lo` and none at `hi` (equal when
    /// the upper search limit itself is solvable).
    pub bracket: (f64, f64),
    /// Upper search limit from nodal capacities.
    pub p_max: f64,
    pub curve: Vec<CurvePoint>,
}

/// `max_e |f_e / a_e|`.
pub fn congestion<T: Scalar>(problem: &FlowNetworkProblem<T>, f: &[T]) -> T {
    f.iter()
        .zip(problem.graph().weights())
        .fold(T::zero(), |acc, (&x, &a)| acc.max((x / a).abs()))
}

/// Scale beyond which some supply or demand exceeds its incident capacity.
pub fn scale_limit<T: Scalar>(problem: &FlowNetworkProblem<T>, p_hat: &[T]) -> T {
    let caps = problem.capacities();
    let mut nodal = vec![T::zero(); problem.graph().n()];
    for (e, &(i, j)) in problem.graph().edges().iter().enumerate() {
        nodal[i] += caps[e];
        nodal[j] += caps[e];
    }
    nodal
        .iter()
        .zip(p_hat)
        .filter(|(_, &p)| p != T::zero())
        .fold(T::max_value().unwrap(), |acc, (&c, &p)| acc.min(c / p.abs()))
}

fn probe<T: Scalar>(ctx: &SolverContext<T>, p_hat: &[T], u: &[i64], scale: T, rho: T) -> Result<CurvePoint> {
    let p: Vec<T> = p_hat.iter().map(|&x| x * scale).collect();
    let local = ctx.with_p(p)?;
    let (f, report) = local.projection_iteration(u, rho)?;
    let f = local.problem().external_flow(&f);
    Ok(CurvePoint {
        scale: scale.as_f64(),
        exists: report.feasible,
        congestion: congestion(local.problem(), &f).as_f64(),
        loop_flows: ctx.basis().cycles().iter().map(|c| loop_flow(c, &f).as_f64()).collect(),
    })
}

/// Power transmission capacity at winding `u`: bisection on `P` in
/// `[0, P_max]` for the largest scale of `p_hat` whose fixed point is
/// feasible. Assumes existence is monotone in `P`.
pub fn ptc<T: Scalar>(ctx: &SolverContext<T>, p_hat: &[T], u: &[i64], tol: f64, rho: T) -> Result<SweepResult> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("PTC tolerance {tol} must be positive")));
    }
    let p_max = scale_limit(ctx.problem(), p_hat);
    if !p_max.is_finite() {
        return Err(Error::Input("supply/demand template is zero".into()));
    }
    let exists = |s: T| probe(ctx, p_hat, u, s, rho).map(|c| c.exists);
    let (ptc, bracket) = if !exists(T::zero())? {
        (None, (0.0, 0.0))
    } else if exists(p_max)? {
        (Some(p_max.as_f64()), (p_max.as_f64(), p_max.as_f64()))
    } else {
        let (mut lo, mut hi) = (T::zero(), p_max);
        while (hi - lo).as_f64() > tol {
            let mid = (lo + hi) / T::lit(2.0);
            if exists(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (Some(lo.as_f64()), (lo.as_f64(), hi.as_f64()))
    };
    let curve = (0..=CURVE_POINTS)
        .map(|k| probe(ctx, p_hat, u, p_max * T::lit(k as f64 / CURVE_POINTS as f64), rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { u: u.to_vec(), ptc, bracket, p_max: p_max.as_f64(), curve })
}

/// PTC sweep over every feasible winding vector, using the problem's `p` as
/// the template. Results are in lexicographic `u` order for any `jobs`.
pub fn sweep<T: Scalar>(ctx: &SolverContext<T>, tol: f64, rho: T, jobs: usize) -> Result<Vec<SweepResult>> {
    if jobs == 0 {
        return Err(Error::Input("parallelism must be at least 1".into()));
    }
    let p_hat = ctx.problem().external_p();
    let us: Vec<Vec<i64>> = feasible_winding_vectors(ctx.basis(), ctx.problem().gamma().as_f64()).collect();
    let run = |u: &Vec<i64>| ptc(ctx, &p_hat, u, tol, rho);
    if jobs == 1 {
        us.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {jobs} worker threads: {e}")))?;
        pool.install(|| us.par_iter().map(run).collect())
    }
}

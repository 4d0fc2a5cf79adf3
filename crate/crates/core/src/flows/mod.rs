//! Flow network problems on the n-torus: flow functions, the projection
//! iteration, and the complete solver.

mod function;
mod problem;
mod solution;
mod solver;

pub(crate) use function::grid;

pub use function::{check_odd, ExtendedFlowFunction, FlowFamily, FlowFunction, Linear, Negated, Sine, SineSeries};
pub use problem::{FlowNetworkProblem, MIN_SLOPE};
pub use solution::{
    cutset_flow, decompose_flow, loop_flow, verify, Solution, SolutionReport, BALANCE_TOL, MARGIN_TOL,
    PHYSICS_TOL,
};
pub use solver::{
    acyclic_solve, check_feasibility, solve_all, solve_with_basis, Feasibility, IterationReport, SolveOptions, SolveOutput,
    SolverContext, DEFAULT_RHO, FEASIBILITY_SLACK,
};

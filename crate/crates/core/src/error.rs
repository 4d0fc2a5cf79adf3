use thiserror::Error;

/// Errors raised by graph algebra, torus geometry, and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected: node {node} is unreachable from node 0")]
    Singularity { node: usize },

    #[error("graph is acyclic: it has no cycle space")]
    AcyclicGraph,

    #[error("graph has {cycles} independent cycle(s); use the complete solver")]
    CyclicGraph { cycles: usize },

    #[error("cycle-edge matrix has numerical rank {found}, expected {expected}")]
    Rank { expected: usize, found: usize },

    #[error("operation requires a fundamental cycle basis")]
    BasisKind,

    #[error("weight on edge {edge} must be positive")]
    Weight { edge: usize },

    #[error("phase vector lies outside the punctured torus: edge {edge} has difference {diff}")]
    PuncturedTorus { edge: usize, diff: f64 },

    #[error("winding number along cycle {cycle} is not an integer (raw value {raw})")]
    NonIntegerWinding { cycle: usize, raw: f64 },

    #[error("point is not in the winding polytope: {0}")]
    PolytopeMembership(String),

    #[error("flow is not balanced: |Bf - p| = {residual}")]
    Balance { residual: f64 },

    #[error("projection iteration exceeded its budget of {budget} iterations (last step {step})")]
    ConvergenceBudget { budget: usize, step: f64 },

    #[error("flow violates the capacity bound on edge {edge}")]
    Feasibility { edge: usize },

    #[error("invalid angle bound: {0}")]
    Gamma(String),

    #[error("invalid flow function: {0}")]
    FlowFunction(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("unknown case '{0}'")]
    UnknownCase(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    /// Whether the error points at bad input rather than numerical trouble.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::Rank { .. } | Error::ConvergenceBudget { .. } | Error::Certification(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Complete solver for flow and elastic network problems whose nodal
//! variables live on the n-torus.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elastic;
pub mod error;
pub mod flows;
pub mod gen;
pub mod graph;
pub mod io;
pub mod powerflow;
mod scalar;
pub mod torus;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Graph = graph::WeightedGraph<f64>;
pub type Problem = flows::FlowNetworkProblem<f64>;
pub type Elastic = elastic::ElasticProblem<f64>;
pub type Solution = flows::Solution<f64>;
pub type Context = flows::SolverContext<f64>;
pub type Phases = torus::PhaseVector<f64>;
pub type Polytope = torus::WindingPolytope<f64>;
pub type Projection = graph::CycleProjection<f64>;

//! Exact counting, singularity constants, exact sampling and local-limit
//! checks for random planted plane trees weighted by a power of their height.
//!
//! Trees of size `N` (edges) carry probability `h(T)^alpha / Z_N(alpha)`.
//! The crate computes `Z_N` exactly or in scaled floating point, evaluates the
//! constants that govern its growth, samples from the measure, and measures
//! metric balls around finite trees to compare against the uniform infinite
//! planar tree.

pub mod analytic;
pub mod counting;
pub mod error;
pub mod local_limit;
pub mod sampler;
pub mod tree;

pub use analytic::{AnalyticConstant, Provenance};
pub use counting::{catalan, CountTable, Mode};
pub use error::{AnalyticError, BallError, CountError, SampleError, TreeError};
pub use local_limit::{exact_ball_mass, lambda, lambda_partial_sum, BallMassReport, LambdaSum, MassMethod};
pub use sampler::RngStream;
pub use tree::{dist, enumerate_trees, graft, BallSpec, Distance, Tree};

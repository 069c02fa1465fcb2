//! Hybrid projection solver for split monotone variational inclusions
//! combined with common fixed points of nonexpansive maps.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: points, linear maps, convex sets and projections;
//! - [`operators`]: resolvents, inverse strongly monotone maps,
//!   nonexpansive maps and the W-mapping;
//! - [`solver`]: configuration checks, one step of the iteration and the
//!   run loop;
//! - [`diagnostics`]: inequality checks and residual monitors over traces;
//! - [`problems`]: benchmark instances with known solutions.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod problems;
pub mod rng;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{ConvexSet, HalfSpace, LinearMap, Point};
pub use solver::{run, step, validate_config, ProblemSpec, SolverConfig};

//! Finite-dimensional inner-product space primitives: points, linear maps,
//! convex sets and their projections.
//!
//! Every space here is finite-dimensional, so weak and norm convergence
//! coincide.

pub mod cuts;
pub mod dykstra;
pub mod linear;
pub mod matrix;
pub mod point;
pub mod sets;

pub use cuts::{build_cn_halfspace, build_qn_halfspace};
pub use dykstra::{dykstra, project_intersection, DykstraOutcome, DykstraSettings};
pub use linear::{estimate_operator_norm, LinearMap, NORM_INFLATION, NORM_TOL};
pub use point::{inner, Point};
pub use sets::{project, project_halfspace_pair, ConvexSet, HalfSpace};

//! Exact nearest-neighbour spacing distributions and gap probabilities for
//! the Gaussian orthogonal, unitary and symplectic ensembles in the bulk.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases below
//! fix the two scalar types that are actually used.

// `!(x > y)` is used on purpose so that NaN lands in the error branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod fredholm;
pub mod ode;
pub mod quadrature;
pub mod rmt;
pub mod scalar;
pub mod series;
pub mod spacing;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{DoubleDouble, Real};
pub use spacing::{Beta, LawsConfig, SpacingLaws, SpacingTable};

/// Spacing laws computed internally in double-double arithmetic.
pub type Laws = SpacingLaws<DoubleDouble>;
pub type LawsF64 = SpacingLaws<f64>;
pub type Trajectory = ode::SolutionTrajectory<DoubleDouble>;
pub type TrajectoryF64 = ode::SolutionTrajectory<f64>;

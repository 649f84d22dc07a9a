//! Distances between trajectories and multi-object trajectories built on the
//! OSPA construction, and Fréchet-mean ("consensus") computation for both via
//! greedy search and Gibbs sampling.
//!
//! The crate is `no_std` and only needs an allocator. Scan indices are
//! 0-based throughout the API.

#![no_std]
// `!(x > 0.0)` also rejects NaN; index loops walk parallel arrays.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
mod float;

pub mod assignment;
pub mod geometry;
pub mod gibbs;
pub mod mot_mean;
pub mod mot_metric;
pub mod traj_mean;
pub mod trajectory;

pub use error::{Error, Result};
pub use gibbs::GibbsConfig;
pub use mot_mean::{ExistenceAssignment, MotMean, MotMeanConfig, MotRepresentation};
pub use mot_metric::{Kappa, MotMetricConfig, MultiObjectTrajectory};
pub use traj_mean::{CostMode, InnerSearch, TrajMeanConfig};
pub use trajectory::{ExistenceHistory, OspaParams, Trajectory};

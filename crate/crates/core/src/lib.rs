//! Riemann integration of set-valued functions on `[0, 1]` with values in
//! finite-dimensional normed spaces.
//!
//! Values are finite point clouds. A set stands for itself under finite
//! semantics; under hull semantics the same generators stand for their convex
//! hull, and every hull query goes through a distance oracle
//! ([`setops::dist_point_to_hull`]) instead of facet enumeration.
//!
//! Module map:
//!
//! - [`spaces`]: norms and declared infratype constants.
//! - [`setops`]: Minkowski arithmetic, Hausdorff distances, hull distances, pruning.
//! - [`partition`]: tagged partitions and the multifunction DSL.
//! - [`integrate`]: Riemann sums with an error ledger and convergence reports.
//! - [`balance`]: sign balancing, infratype estimates, point selection.
//! - [`counterexamples`]: the Hilbert-space example and the `ℓ₁` separation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod balance;
pub mod counterexamples;
mod error;
pub mod integrate;
pub mod partition;
pub mod setops;
pub mod spaces;
pub mod stats;

pub use error::{Error, Result};
pub use partition::{Multifunction, TagRule, TaggedPartition};
pub use setops::{PointSet, PrunedSet};
pub use spaces::{Norm, SpaceDescriptor, Vector};

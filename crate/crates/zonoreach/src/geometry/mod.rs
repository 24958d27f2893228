//! Set representations and exact G-rep arithmetic.
//!
//! All types here are immutable values and every operation is a pure
//! function, so they can be shared freely across threads.

mod polytope;
pub(crate) mod sampling;
mod volume;
mod zonotope;

pub use polytope::{DisturbanceSet, HPolytope, HyperBox, VPolytope};
pub use sampling::{support_counterexample, support_dominates, unit_directions};
pub use volume::volume_exact;
pub use zonotope::Zonotope;

/// Generators with 2-norm below this are no-ops and are dropped on
/// construction; they would also break normalization in the selection
/// heuristics downstream.
pub(crate) const ZERO_GEN_TOL: f64 = 1e-12;

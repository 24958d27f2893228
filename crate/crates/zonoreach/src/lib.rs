//! Zonotopic backward reachability for uncertain discrete-time linear systems.
//!
//! The crate computes under- and over-approximations of backward reachable
//! sets (BRSs) of systems `x⁺ = A x + B u + E w + K` with zonotopic target
//! and input sets. The key primitive is a template-aligned inner/outer
//! approximation of the Minkowski difference `Z ⊖ EW`, obtained from linear
//! and concave optimization problems, after which the difference reduces to
//! generator-wise subtraction. On top of that sit an inner zonotope order
//! reduction, a containment-LP baseline, a reachability control law driven
//! by the stored per-step difference sets, and a benchmark harness.

pub mod bench;
pub mod brs;
pub mod cases;
pub mod config;
pub mod control;
pub mod error;
pub mod geometry;
pub mod minkdiff;
pub mod problem;
pub mod reduction;
pub mod solver;

pub use brs::{compute_brs, BrsOptions, BrsSequence, SystemModel};
pub use config::Config;
pub use control::Controller;
pub use error::{Error, Result};
pub use geometry::Zonotope;

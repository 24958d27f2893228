//! Centralized numerical tolerances and resource caps.
//!
//! Every comparison threshold used across the crate is named here rather
//! than sprinkled as inline literals. Three tiers:
//!
//! * `feas_tol` — feasibility of optimizer outputs (constraint residuals),
//! * `eq_tol` — agreement of two algebraic routes to the same quantity,
//! * `struct_tol` — structural identities that hold to machine precision
//!   (generator-wise equality, dropping zero columns).

/// Numerical configuration shared by all set operations and solver calls.
#[derive(Clone, Copy, Debug)]
pub struct Config {
    /// Tolerance for LP/cone feasibility checks (constraint residuals).
    pub feas_tol: f64,
    /// Tolerance for equality of two independently computed values.
    pub eq_tol: f64,
    /// Tolerance for structural identities (exact G-rep manipulations).
    pub struct_tol: f64,
    /// Directions sampled per state dimension in support-dominance checks.
    pub containment_dirs_per_dim: usize,
    /// Cap on C(N, n) subsets enumerated by exact volume computation.
    pub volume_comb_cap: u64,
    /// Concave solves: stop iterating once the objective improves less than this.
    pub concave_improve_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            eq_tol: 1e-9,
            struct_tol: 1e-12,
            containment_dirs_per_dim: 64,
            volume_comb_cap: 200_000,
            concave_improve_tol: 1e-6,
        }
    }
}

impl Config {
    /// Generators with 2-norm below this are dropped on zonotope construction.
    pub fn zero_generator_tol(&self) -> f64 {
        self.struct_tol
    }
}

//! Seeded direction sampling and the support-dominance containment falsifier.
//!
//! Exact zonotope containment is co-NP-hard in general; support-function
//! checks over sampled unit directions give a sound falsifier: any violated
//! direction is a true counterexample to `inner ⊆ outer`, while "no
//! violation found" is only a necessary condition.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Zonotope;
use crate::error::{Error, Result};

/// Standard normal via Box-Muller; deterministic given the rng stream.
pub(crate) fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `count` unit vectors in `dim` dimensions, Gaussian-normalized,
/// reproducible under the seed.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirs = Vec::with_capacity(count);
    while dirs.len() < count {
        let d = DVector::from_fn(dim, |_, _| normal(&mut rng));
        let n = d.norm();
        if n >= 1e-12 {
            dirs.push(d / n);
        }
    }
    dirs
}

/// First sampled direction in which `inner`'s support exceeds `outer`'s by
/// more than `tol`, with the excess. `None` means no violation found.
pub fn support_counterexample(
    inner: &Zonotope,
    outer: &Zonotope,
    n_dirs: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<(DVector<f64>, f64)>> {
    if inner.dim() != outer.dim() {
        return Err(Error::DimMismatch(format!(
            "containment check between {}-dim and {}-dim zonotopes",
            inner.dim(),
            outer.dim()
        )));
    }
    if n_dirs == 0 {
        return Err(Error::InvalidArgument("need at least one direction".into()));
    }
    for dir in unit_directions(inner.dim(), n_dirs, seed) {
        let excess = inner.support(&dir)? - outer.support(&dir)?;
        if excess > tol {
            return Ok(Some((dir, excess)));
        }
    }
    Ok(None)
}

/// `true` iff `support(inner, d) ≤ support(outer, d) + tol` for every
/// sampled direction. `false` certifies `inner ⊄ outer`.
pub fn support_dominates(
    inner: &Zonotope,
    outer: &Zonotope,
    n_dirs: usize,
    seed: u64,
    tol: f64,
) -> Result<bool> {
    Ok(support_counterexample(inner, outer, n_dirs, seed, tol)?.is_none())
}

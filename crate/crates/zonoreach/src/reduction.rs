//! Inner zonotope order reduction.
//!
//! Each merge replaces two generators `gᵢ, gⱼ` by `gᵢ + gⱼ` or `gᵢ − gⱼ`,
//! which always yields an enclosed zonotope; repeating drives the order
//! down. Pair choice minimizes `‖gᵢ‖₂·‖gⱼ − ĝᵢ(gⱼᵀĝᵢ)‖₂` (parallel or small
//! pairs first); the sign keeping the combined generator larger against the
//! right inverse of the remaining columns wins.

use nalgebra::{DMatrix, DVector};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{volume_exact, Zonotope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeSign {
    Plus,
    Minus,
}

/// One executed merge: columns `i < j` (0-based, indices valid at the time
/// of the merge) combined with the given sign.
#[derive(Clone, Copy, Debug)]
pub struct MergeRecord {
    pub i: usize,
    pub j: usize,
    pub sign: MergeSign,
}

/// Outcome of [`reduce_to_order`].
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub merges: Vec<MergeRecord>,
    pub before_order: f64,
    pub after_order: f64,
    /// `vol(after) / vol(before)`, when exact volume is tractable
    /// (low dimension, subset count under the cap, nonzero start).
    pub volume_ratio: Option<f64>,
}

/// Merge one generator pair; the result has `N − 1` generators and is
/// contained in the input.
pub fn reduce_once(z: &Zonotope) -> Result<(Zonotope, MergeRecord)> {
    let n_gen = z.num_generators();
    if n_gen < 2 {
        return Err(Error::InvalidArgument(
            "order reduction needs at least two generators".into(),
        ));
    }
    let g = z.generators();

    // arg min over i < j of ||g_i|| * || g_j - ĝ_i (g_jᵀ ĝ_i) ||,
    // lexicographically smallest pair on ties.
    let norms: Vec<f64> = (0..n_gen).map(|k| g.column(k).norm()).collect();
    let mut best = (0usize, 1usize);
    let mut best_score = f64::INFINITY;
    for (i, &norm_i) in norms.iter().enumerate() {
        let gi_hat = g.column(i) / norm_i;
        for j in i + 1..n_gen {
            let proj = g.column(j) - &gi_hat * g.column(j).dot(&gi_hat);
            let score = norm_i * proj.norm();
            if score < best_score - 1e-15 {
                best_score = score;
                best = (i, j);
            }
        }
    }
    let (i, j) = best;

    let n = z.dim();
    let mut remaining = DMatrix::zeros(n, n_gen - 2);
    let mut out = 0;
    for k in 0..n_gen {
        if k != i && k != j {
            remaining.set_column(out, &g.column(k));
            out += 1;
        }
    }

    let gi = g.column(i).into_owned();
    let gj = g.column(j).into_owned();
    let plus = &gi + &gj;
    let minus = &gi - &gj;
    let sign = match right_inverse_transpose(&remaining) {
        Some(gp) => {
            let s_plus = (plus.transpose() * &gp).norm();
            let s_minus = (minus.transpose() * &gp).norm();
            if s_plus >= s_minus {
                MergeSign::Plus
            } else {
                MergeSign::Minus
            }
        }
        // remaining matrix not full row rank: no right inverse, take +
        None => MergeSign::Plus,
    };
    let combined: DVector<f64> = match sign {
        MergeSign::Plus => plus,
        MergeSign::Minus => minus,
    };

    let mut new_g = DMatrix::zeros(n, n_gen - 1);
    for k in 0..n_gen - 2 {
        new_g.set_column(k, &remaining.column(k));
    }
    new_g.set_column(n_gen - 2, &combined);
    let reduced = Zonotope::new(new_g, z.center().clone())?;
    Ok((reduced, MergeRecord { i, j, sign }))
}

/// `(G'ᵀ)` where `G'` is the least-squares right inverse of `m`; `None`
/// when `m` lacks full row rank.
fn right_inverse_transpose(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.ncols() < m.nrows() || m.nrows() == 0 {
        return None;
    }
    let svd = m.clone().svd(false, false);
    let min_sv = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_sv <= 1e-10 {
        return None;
    }
    // full row rank: m mᵀ invertible, right inverse mᵀ (m mᵀ)⁻¹
    let mmt = m * m.transpose();
    let inv = mmt.try_inverse()?;
    Some((m.transpose() * inv).transpose())
}

/// Merge until `order(Z) ≤ target_order`; every intermediate zonotope is
/// enclosed by its predecessor, so the result is enclosed by the input.
pub fn reduce_to_order(
    z: &Zonotope,
    target_order: f64,
    cfg: &Config,
) -> Result<(Zonotope, ReductionReport)> {
    if !target_order.is_finite() || target_order <= 0.0 {
        return Err(Error::InvalidArgument("target order must be positive".into()));
    }
    let n = z.dim();
    let target_gens = ((target_order * n as f64) + 1e-9).floor() as usize;
    if target_gens < 1 {
        return Err(Error::InvalidArgument(format!(
            "target order {target_order} leaves no generators in dimension {n}"
        )));
    }

    let vol_tractable = |zz: &Zonotope| zz.dim() <= 4;
    let before_vol = if vol_tractable(z) {
        volume_exact(z, cfg.volume_comb_cap).ok()
    } else {
        None
    };

    let mut current = z.clone();
    let mut merges = Vec::new();
    while current.num_generators() > target_gens {
        let (next, record) = reduce_once(&current)?;
        merges.push(record);
        current = next;
    }

    let volume_ratio = match before_vol {
        Some(v0) if v0 > 0.0 => volume_exact(&current, cfg.volume_comb_cap)
            .ok()
            .map(|v1| v1 / v0),
        _ => None,
    };

    let report = ReductionReport {
        merges,
        before_order: z.order(),
        after_order: current.order(),
        volume_ratio,
    };
    Ok((current, report))
}

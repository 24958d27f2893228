//! Backward-reachable-set recursion.
//!
//! Starting from the target `Z₀`, each backward step erodes the current set
//! by (an aligned outer cover of) the disturbance image `EW`, inflates by
//! the control authority `(−B)U`, shifts by `−K`, and maps through `A⁻¹`:
//!
//! `Z̲ₖ₊₁ = A⁻¹( (Z̲ₖ ⊖ cover(EW)) ⊕ (−B)U ⊕ {−K} )`
//!
//! The over chain mirrors this with an inner fit of `EW`, so
//! `Z̲ₖ ⊆ Xₖ ⊆ Z̄ₖ` at every step. The per-step difference sets
//! `Z̲ₖ ⊖ cover(EW)` are stored: they are exactly what the one-step
//! reachability control law needs later.

use std::time::Instant;

use nalgebra::{linalg::LU, DMatrix, DVector, Dyn};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{DisturbanceSet, HPolytope, VPolytope, Zonotope};
use crate::minkdiff::{
    default_b_weights, default_d_weights, inner_approx_max_in, outer_approx_min_out,
    under_approx_sadraddini,
};
use crate::reduction::reduce_to_order;

/// Which program computes the under chain's difference set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnderMethod {
    /// Vertex-covering LP on `W`'s V-rep.
    MinOut,
    /// Zonotope-containment LP on `W`'s G-rep (boxes only here).
    Sadraddini,
}

/// When in-loop order reduction fires on the under chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReducePolicy {
    Never,
    /// Reduce every step to `max_order`.
    Always,
    /// Reduce (to `max_order`) only once the order exceeds the threshold.
    AtOrderThreshold(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct BrsOptions {
    pub method: UnderMethod,
    pub reduce: ReducePolicy,
    /// Target order for in-loop reduction of the under chain.
    pub max_order: f64,
}

impl Default for BrsOptions {
    fn default() -> Self {
        Self {
            method: UnderMethod::MinOut,
            reduce: ReducePolicy::AtOrderThreshold(6.0),
            max_order: 6.0,
        }
    }
}

/// The uncertain linear system `x⁺ = A x + B u + E w + K` with its input
/// and disturbance sets. `A` must be invertible (it always is when the
/// model comes from time discretization); its LU factorization is taken
/// once and reused for every backward map.
#[derive(Clone, Debug)]
pub struct SystemModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    e: DMatrix<f64>,
    k: DVector<f64>,
    u: Zonotope,
    w: DisturbanceSet,
    a_lu: LU<f64, Dyn, Dyn>,
    minus_bu: Zonotope,
    ew_hrep: Option<HPolytope>,
    ew_vertices: VPolytope,
}

impl SystemModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        e: DMatrix<f64>,
        k: DVector<f64>,
        u: Zonotope,
        w: DisturbanceSet,
        cfg: &Config,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimMismatch("A must be square".into()));
        }
        if b.nrows() != n || e.nrows() != n || k.len() != n {
            return Err(Error::DimMismatch("B, E, K rows must match A".into()));
        }
        if u.dim() != b.ncols() {
            return Err(Error::DimMismatch(format!(
                "U lives in {}-dim space but B has {} columns",
                u.dim(),
                b.ncols()
            )));
        }
        if w.dim() != e.ncols() {
            return Err(Error::DimMismatch(format!(
                "W lives in {}-dim space but E has {} columns",
                w.dim(),
                e.ncols()
            )));
        }
        let min_sv = a
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_sv <= 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "A is singular (smallest singular value {min_sv:.2e}); the backward map needs A⁻¹"
            )));
        }
        w.validate(cfg)?;

        let a_lu = LU::new(a.clone());
        let minus_bu = u.linear_map(&(-&b))?;
        let ew_hrep = if e.is_identity(0.0) {
            Some(w.hrep())
        } else if e.nrows() == e.ncols() {
            w.hrep().image_through(&e).ok()
        } else {
            None
        };
        let ew_vertices = VPolytope::new(w.vertices()?)?;

        Ok(Self {
            a,
            b,
            e,
            k,
            u,
            w,
            a_lu,
            minus_bu,
            ew_hrep,
            ew_vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    pub fn k(&self) -> &DVector<f64> {
        &self.k
    }

    pub fn u(&self) -> &Zonotope {
        &self.u
    }

    pub fn w(&self) -> &DisturbanceSet {
        &self.w
    }

    /// One forward step of the dynamics.
    pub fn step(&self, x: &DVector<f64>, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b * u + &self.e * w + &self.k
    }

    /// `A⁻¹ Z` through the stored factorization.
    fn backward_map(&self, z: &Zonotope) -> Result<Zonotope> {
        let g = self
            .a_lu
            .solve(z.generators())
            .ok_or_else(|| Error::SolverFailure("LU solve failed on generators".into()))?;
        let c = self
            .a_lu
            .solve(z.center())
            .ok_or_else(|| Error::SolverFailure("LU solve failed on center".into()))?;
        Zonotope::new(g, c)
    }

    fn covering_weights(&self, template: &Zonotope) -> Result<Vec<f64>> {
        match self.w.as_box() {
            Some(wb) => default_b_weights(template, &self.e, wb),
            None => Ok(default_d_weights(template)
                .into_iter()
                .map(|x| x.max(1e-6))
                .collect()),
        }
    }
}

/// One under step: returns the next set and the stored difference
/// `diff = Zₖ ⊖ cover(EW)`, with `next = A⁻¹(diff ⊕ (−B)U ⊕ {−K})`.
pub fn brs_step_under(
    zk: &Zonotope,
    sys: &SystemModel,
    method: UnderMethod,
    cfg: &Config,
) -> Result<(Zonotope, Zonotope)> {
    let diff = match method {
        UnderMethod::MinOut => {
            let b = sys.covering_weights(zk)?;
            let t = outer_approx_min_out(zk, &sys.e, &sys.ew_vertices, &b, cfg)?;
            zk.aligned_diff(t.alpha.as_slice(), &t.center, cfg)?
        }
        UnderMethod::Sadraddini => {
            let w_zono = sys.w.as_zonotope().ok_or_else(|| {
                Error::InvalidArgument(
                    "the containment method needs W in G-rep (a box)".into(),
                )
            })?;
            let t = under_approx_sadraddini(zk, &sys.e, &w_zono, cfg)?;
            t.realize(zk)?
        }
    };
    let pre = diff.minkowski_sum(&sys.minus_bu)?.translate(&(-&sys.k))?;
    Ok((sys.backward_map(&pre)?, diff))
}

/// One over step, mirroring [`brs_step_under`] with the inner fit of `EW`.
pub fn brs_step_over(zk: &Zonotope, sys: &SystemModel, cfg: &Config) -> Result<Zonotope> {
    let hrep = sys.ew_hrep.as_ref().ok_or_else(|| {
        Error::InvalidArgument(
            "over chain needs the H-rep of EW; E must be identity or square invertible".into(),
        )
    })?;
    let d = default_d_weights(zk);
    let identity = DMatrix::identity(sys.dim(), sys.dim());
    let t = inner_approx_max_in(zk, &identity, hrep, &d, cfg)?;
    let diff = zk.aligned_diff(t.alpha.as_slice(), &t.center, cfg)?;
    let pre = diff.minkowski_sum(&sys.minus_bu)?.translate(&(-&sys.k))?;
    sys.backward_map(&pre)
}

/// Why and where the under chain stopped early.
#[derive(Clone, Debug)]
pub struct Truncation {
    /// First step index `k` for which `Z̲ₖ` does not exist.
    pub first_empty_step: usize,
    pub reason: String,
}

/// Per-step bookkeeping.
#[derive(Clone, Debug)]
pub struct StepMeta {
    pub k: usize,
    pub under_ms: Option<f64>,
    pub over_ms: Option<f64>,
    pub order_under: Option<f64>,
    pub order_over: Option<f64>,
}

/// The computed chains. `under[k] ⊆ Xₖ ⊆ over[k]`; `diff_under[k]` is the
/// difference set computed from `Z̲ₖ` (the set the one-step control law
/// must reach from any state of `Z̲ₖ₊₁`).
#[derive(Clone, Debug)]
pub struct BrsSequence {
    pub under: Vec<Zonotope>,
    pub over: Vec<Zonotope>,
    pub diff_under: Vec<Zonotope>,
    pub truncation: Option<Truncation>,
    /// Set when an inner-fit solve broke down numerically; the over chain
    /// simply stops there (systems with a backward-unstable uncontrollable
    /// subspace blow the over chain up exponentially).
    pub over_truncation: Option<Truncation>,
    pub steps: Vec<StepMeta>,
}

impl BrsSequence {
    /// Steps the stored controller data supports.
    pub fn horizon(&self) -> usize {
        self.diff_under.len()
    }
}

/// Run the recursion for `horizon` steps. An infeasible covering LP
/// truncates the under chain (recorded, not an error); the over chain
/// continues to the full horizon. The under chain is order-reduced in the
/// loop per `opts.reduce`; the over chain is never reduced (the inner
/// merge technique would break its ⊇ guarantee).
pub fn compute_brs(
    sys: &SystemModel,
    z0: &Zonotope,
    horizon: usize,
    opts: &BrsOptions,
    cfg: &Config,
) -> Result<BrsSequence> {
    if z0.dim() != sys.dim() {
        return Err(Error::DimMismatch("target set dimension".into()));
    }
    let mut under = vec![z0.clone()];
    let mut over = vec![z0.clone()];
    let mut diff_under = Vec::new();
    let mut steps = Vec::new();
    let mut truncation: Option<Truncation> = None;
    let mut over_truncation: Option<Truncation> = None;

    for k in 0..horizon {
        let (next_under, under_ms) = if truncation.is_none() {
            let t0 = Instant::now();
            match brs_step_under(under.last().unwrap(), sys, opts.method, cfg) {
                Ok((mut next, diff)) => {
                    let fire = match opts.reduce {
                        ReducePolicy::Never => false,
                        ReducePolicy::Always => true,
                        ReducePolicy::AtOrderThreshold(theta) => next.order() > theta,
                    };
                    if fire && next.order() > opts.max_order {
                        let (reduced, _) = reduce_to_order(&next, opts.max_order, cfg)?;
                        next = reduced;
                    }
                    diff_under.push(diff);
                    (Some(next), Some(t0.elapsed().as_secs_f64() * 1e3))
                }
                Err(Error::EmptyUnderApprox(reason)) => {
                    truncation = Some(Truncation {
                        first_empty_step: k + 1,
                        reason,
                    });
                    (None, None)
                }
                Err(e) => return Err(e),
            }
        } else {
            (None, None)
        };

        let (next_over, over_ms) = if over_truncation.is_none() {
            let t1 = Instant::now();
            match brs_step_over(over.last().unwrap(), sys, cfg) {
                Ok(z) => (Some(z), Some(t1.elapsed().as_secs_f64() * 1e3)),
                Err(Error::SolverFailure(reason)) => {
                    over_truncation = Some(Truncation {
                        first_empty_step: k + 1,
                        reason,
                    });
                    (None, None)
                }
                Err(e) => return Err(e),
            }
        } else {
            (None, None)
        };

        steps.push(StepMeta {
            k: k + 1,
            under_ms,
            over_ms,
            order_under: next_under.as_ref().map(|z| z.order()),
            order_over: next_over.as_ref().map(|z| z.order()),
        });
        if let Some(z) = next_under {
            under.push(z);
        }
        if let Some(z) = next_over {
            over.push(z);
        }
        if truncation.is_some() && over_truncation.is_some() {
            break;
        }
    }

    Ok(BrsSequence {
        under,
        over,
        diff_under,
        truncation,
        over_truncation,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{support_dominates, HyperBox};
    use nalgebra::{dmatrix, dvector};

    fn cfg() -> Config {
        Config::default()
    }

    /// 1D instance: A=1, B=1, E=1, K=0, U=[-1,1], W=[-0.1,0.1], Z0=[-1,1].
    pub(crate) fn demo_1d(w_radius: f64) -> (SystemModel, Zonotope) {
        let sys = SystemModel::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dvector![0.0],
            HyperBox::symmetric(&dvector![1.0]).unwrap().to_zonotope(),
            DisturbanceSet::Box(HyperBox::symmetric(&dvector![w_radius]).unwrap()),
            &Config::default(),
        )
        .unwrap();
        let z0 = HyperBox::symmetric(&dvector![1.0]).unwrap().to_zonotope();
        (sys, z0)
    }

    /// Closed-form interval recursion for the 1D instance:
    /// r_{k+1} = (r_k - rho + u) / |a|.
    fn interval_chain(r0: f64, rho: f64, u: f64, a: f64, k: usize) -> Vec<f64> {
        let mut out = vec![r0];
        for _ in 0..k {
            out.push((out.last().unwrap() - rho + u) / a.abs());
        }
        out
    }

    #[test]
    fn one_step_matches_interval_oracle() {
        let (sys, z0) = demo_1d(0.1);
        let (next, diff) = brs_step_under(&z0, &sys, UnderMethod::MinOut, &cfg()).unwrap();
        // ([-1,1] erode [-0.1,0.1]) = [-0.9,0.9], then + [-1,1] = [-1.9,1.9]
        assert!((diff.support(&dvector![1.0]).unwrap() - 0.9).abs() < 1e-9);
        assert!((next.support(&dvector![1.0]).unwrap() - 1.9).abs() < 1e-9);
        assert!((next.support(&dvector![-1.0]).unwrap() - 1.9).abs() < 1e-9);
    }

    #[test]
    fn chain_matches_interval_recursion() {
        let (sys, z0) = demo_1d(0.1);
        let seq = compute_brs(&sys, &z0, 3, &BrsOptions::default(), &cfg()).unwrap();
        let oracle = interval_chain(1.0, 0.1, 1.0, 1.0, 3);
        assert_eq!(seq.under.len(), 4);
        for (z, r) in seq.under.iter().zip(&oracle) {
            assert!((z.support(&dvector![1.0]).unwrap() - r).abs() < 1e-9);
        }
        // boxes are exact on both sides
        for (zu, zo) in seq.under.iter().zip(&seq.over) {
            let du = zu.support(&dvector![1.0]).unwrap();
            let do_ = zo.support(&dvector![1.0]).unwrap();
            assert!((du - do_).abs() < 1e-7);
        }
        assert!(seq.truncation.is_none());
    }

    #[test]
    fn zero_horizon_is_target_only() {
        let (sys, z0) = demo_1d(0.1);
        let seq = compute_brs(&sys, &z0, 0, &BrsOptions::default(), &cfg()).unwrap();
        assert_eq!(seq.under.len(), 1);
        assert_eq!(seq.over.len(), 1);
        assert_eq!(seq.horizon(), 0);
    }

    #[test]
    fn disturbance_free_chains_are_identical() {
        let (sys, z0) = demo_1d(0.0);
        let seq = compute_brs(&sys, &z0, 3, &BrsOptions::default(), &cfg()).unwrap();
        for (zu, zo) in seq.under.iter().zip(&seq.over) {
            assert_eq!(zu.num_generators(), zo.num_generators());
            assert!((zu.generators() - zo.generators()).norm() < 1e-9);
            assert!((zu.center() - zo.center()).norm() < 1e-9);
        }
        // no subtraction: diff equals the set it was computed from
        for (d, z) in seq.diff_under.iter().zip(&seq.under) {
            assert!((d.generators() - z.generators()).norm() < 1e-9);
        }
    }

    fn decoupled_2d() -> (SystemModel, Zonotope) {
        let sys = SystemModel::new(
            dmatrix![2.0, 0.0; 0.0, 1.0],
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
            dvector![0.0, 0.0],
            HyperBox::symmetric(&dvector![1.0, 0.5]).unwrap().to_zonotope(),
            DisturbanceSet::Box(HyperBox::symmetric(&dvector![0.1, 0.2]).unwrap()),
            &Config::default(),
        )
        .unwrap();
        let z0 = HyperBox::symmetric(&dvector![1.0, 1.0]).unwrap().to_zonotope();
        (sys, z0)
    }

    #[test]
    fn decoupled_axes_follow_per_axis_recursion() {
        let (sys, z0) = decoupled_2d();
        let seq = compute_brs(&sys, &z0, 4, &BrsOptions::default(), &cfg()).unwrap();
        let ax0 = interval_chain(1.0, 0.1, 1.0, 2.0, 4);
        let ax1 = interval_chain(1.0, 0.2, 0.5, 1.0, 4);
        for (k, z) in seq.under.iter().enumerate() {
            assert!((z.support(&dvector![1.0, 0.0]).unwrap() - ax0[k]).abs() < 1e-9);
            assert!((z.support(&dvector![0.0, 1.0]).unwrap() - ax1[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn map_halves_support_for_a_two_i() {
        // A = diag(2,1): the x-axis support of the pre-map set halves.
        let (sys, z0) = decoupled_2d();
        let (next, diff) = brs_step_under(&z0, &sys, UnderMethod::MinOut, &cfg()).unwrap();
        let d = dvector![1.0, 0.0];
        let pre_support = diff.support(&d).unwrap() + sys.u().support(&d).unwrap();
        assert!((next.support(&d).unwrap() - pre_support / 2.0).abs() < 1e-9);
    }

    #[test]
    fn sandwich_property_every_step() {
        let (sys, z0) = decoupled_2d();
        let seq = compute_brs(&sys, &z0, 5, &BrsOptions::default(), &cfg()).unwrap();
        for (k, (zu, zo)) in seq.under.iter().zip(&seq.over).enumerate() {
            assert!(
                support_dominates(zu, zo, 128, k as u64, 1e-7).unwrap(),
                "under escaped over at step {k}"
            );
        }
    }

    #[test]
    fn generator_growth_is_linear_without_reduction() {
        let (sys, z0) = decoupled_2d();
        let opts = BrsOptions {
            reduce: ReducePolicy::Never,
            ..Default::default()
        };
        let seq = compute_brs(&sys, &z0, 5, &opts, &cfg()).unwrap();
        let n_u = sys.u().num_generators();
        for (k, z) in seq.under.iter().enumerate() {
            assert_eq!(z.num_generators(), z0.num_generators() + k * n_u);
        }
    }

    #[test]
    fn reduction_caps_the_order() {
        let (sys, z0) = decoupled_2d();
        let opts = BrsOptions {
            reduce: ReducePolicy::AtOrderThreshold(2.0),
            max_order: 2.0,
            ..Default::default()
        };
        let seq = compute_brs(&sys, &z0, 8, &opts, &cfg()).unwrap();
        for z in &seq.under {
            assert!(z.order() <= 2.0 + 1e-9);
        }
        // over chain must not be touched by inner reduction
        assert_eq!(
            seq.over.last().unwrap().num_generators(),
            z0.num_generators() + 8 * sys.u().num_generators()
        );
    }

    #[test]
    fn oversized_w_truncates_under_chain_but_over_continues() {
        let sys = SystemModel::new(
            dmatrix![1.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dvector![0.0],
            HyperBox::symmetric(&dvector![0.05]).unwrap().to_zonotope(),
            DisturbanceSet::Box(HyperBox::symmetric(&dvector![0.4]).unwrap()),
            &Config::default(),
        )
        .unwrap();
        let z0 = HyperBox::symmetric(&dvector![1.0]).unwrap().to_zonotope();
        // radius recursion: r - 0.4 + 0.05 -> dead after 2-3 steps
        let seq = compute_brs(&sys, &z0, 6, &BrsOptions::default(), &cfg()).unwrap();
        let t = seq.truncation.as_ref().expect("must truncate");
        assert!(t.first_empty_step <= 3, "{}", t.first_empty_step);
        assert_eq!(seq.under.len(), t.first_empty_step);
        assert_eq!(seq.over.len(), 7);
    }

    #[test]
    fn sadraddini_method_matches_on_boxes() {
        let (sys, z0) = decoupled_2d();
        let minout = compute_brs(&sys, &z0, 3, &BrsOptions::default(), &cfg()).unwrap();
        let opts = BrsOptions {
            method: UnderMethod::Sadraddini,
            ..Default::default()
        };
        let sad = compute_brs(&sys, &z0, 3, &opts, &cfg()).unwrap();
        for (a, b) in minout.under.iter().zip(&sad.under) {
            for dir in [dvector![1.0, 0.0], dvector![0.0, 1.0], dvector![1.0, 1.0]] {
                let sa = a.support(&dir).unwrap();
                let sb = b.support(&dir).unwrap();
                assert!((sa - sb).abs() < 1e-6, "{sa} vs {sb}");
            }
        }
    }

    #[test]
    fn singular_a_rejected() {
        let r = SystemModel::new(
            dmatrix![0.0],
            dmatrix![1.0],
            dmatrix![1.0],
            dvector![0.0],
            HyperBox::symmetric(&dvector![1.0]).unwrap().to_zonotope(),
            DisturbanceSet::Box(HyperBox::symmetric(&dvector![0.1]).unwrap()),
            &Config::default(),
        );
        assert!(r.is_err());
    }
}

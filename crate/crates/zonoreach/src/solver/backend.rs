//! Clarabel conic backend.
//!
//! Row layout handed to the solver: equality rows (zero cone), then `≤` rows
//! and finite bounds (nonnegative cone), then optional exponential-cone
//! triples `(tᵢ, 1, αᵢ)` encoding `tᵢ ≤ log(αᵢ)`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, ExponentialConeT, IPSolver, NonnegativeConeT,
    SolverStatus, SupportedConeT, ZeroConeT,
};

use super::{LinearProgram, Sense};
use crate::config::Config;
use crate::error::{Error, Result};

pub(crate) enum RawOutcome {
    Solution(Vec<f64>),
    Infeasible,
    Unbounded,
    Failure,
}

/// Solve `p`, optionally with extra log-hypograph variables: for each pair
/// `(alpha_var, t_var)` in `exp_pairs` an exponential cone enforces
/// `x[t_var] ≤ log(x[alpha_var])`. `extra_objective` overrides the linear
/// objective when non-empty (same indexing, always minimized as given).
pub(crate) fn solve(
    p: &LinearProgram,
    exp_pairs: &[(usize, usize)],
    extra_objective: &[f64],
    cfg: &Config,
) -> Result<RawOutcome> {
    let n = p.num_vars;
    let mut q: Vec<f64> = if extra_objective.is_empty() {
        let (obj, sense) = p.objective();
        match sense {
            Sense::Min => obj.to_vec(),
            Sense::Max => obj.iter().map(|c| -c).collect(),
        }
    } else {
        extra_objective.to_vec()
    };
    q.resize(n, 0.0);

    // Assemble triplets of A for the conic form  A·x + s = b,  s ∈ K.
    let mut trips: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut row = 0usize;

    for r in &p.eq_rows {
        for &(i, v) in &r.coeffs {
            trips.push((row, i, v));
        }
        b.push(r.rhs);
        row += 1;
    }
    let n_eq = row;

    for r in &p.le_rows {
        for &(i, v) in &r.coeffs {
            trips.push((row, i, v));
        }
        b.push(r.rhs);
        row += 1;
    }
    for (i, &lo) in p.lower.iter().enumerate() {
        if lo.is_finite() {
            // -x_i <= -lo
            trips.push((row, i, -1.0));
            b.push(-lo);
            row += 1;
        }
    }
    for (i, &hi) in p.upper.iter().enumerate() {
        if hi.is_finite() {
            trips.push((row, i, 1.0));
            b.push(hi);
            row += 1;
        }
    }
    let n_ineq = row - n_eq;

    for &(alpha_var, t_var) in exp_pairs {
        // s = (t, 1, alpha) ∈ K_exp  ⇔  exp(t) ≤ alpha
        trips.push((row, t_var, -1.0));
        b.push(0.0);
        trips.push((row + 2, alpha_var, -1.0));
        b.push(1.0);
        b.push(0.0);
        row += 3;
    }

    let a = csc_from_triplets(row, n, &mut trips)?;
    let pmat = CscMatrix::zeros((n, n));
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if n_eq > 0 {
        cones.push(ZeroConeT(n_eq));
    }
    if n_ineq > 0 {
        cones.push(NonnegativeConeT(n_ineq));
    }
    for _ in exp_pairs {
        cones.push(ExponentialConeT());
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-9)
        .tol_gap_rel(1e-9)
        .tol_feas(1e-9)
        .max_iter(400)
        .build()
        .map_err(|e| Error::SolverFailure(format!("settings: {e:?}")))?;

    let _ = cfg;
    let mut solver = DefaultSolver::new(&pmat, &q, &a, &b, &cones, settings)
        .map_err(|e| Error::SolverFailure(format!("setup: {e:?}")))?;
    solver.solve();

    let status = solver.solution.status;
    Ok(match status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            RawOutcome::Solution(solver.solution.x.clone())
        }
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            RawOutcome::Infeasible
        }
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => RawOutcome::Unbounded,
        _ => RawOutcome::Failure,
    })
}

fn csc_from_triplets(
    nrows: usize,
    ncols: usize,
    trips: &mut [(usize, usize, f64)],
) -> Result<CscMatrix<f64>> {
    trips.sort_unstable_by_key(|&(r, c, _)| (c, r));
    // Clarabel requires strictly increasing row indices per column, so
    // duplicate (row, col) entries are summed.
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(trips.len());
    for &(r, c, v) in trips.iter() {
        if r >= nrows || c >= ncols {
            return Err(Error::InvalidArgument(format!(
                "triplet ({r},{c}) out of shape {nrows}x{ncols}"
            )));
        }
        match merged.last_mut() {
            Some(&mut (lr, lc, ref mut lv)) if lr == r && lc == c => *lv += v,
            _ => merged.push((r, c, v)),
        }
    }
    let mut colptr = vec![0usize; ncols + 1];
    let mut rowval: Vec<usize> = Vec::with_capacity(merged.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(merged.len());
    for &(r, c, v) in &merged {
        colptr[c + 1] += 1;
        rowval.push(r);
        nzval.push(v);
    }
    for c in 0..ncols {
        colptr[c + 1] += colptr[c];
    }
    Ok(CscMatrix::new(nrows, ncols, colptr, rowval, nzval))
}

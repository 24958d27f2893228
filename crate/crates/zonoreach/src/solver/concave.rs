//! Maximization of `Σ dᵢ log(αᵢ)` over linear constraints.
//!
//! Default route: hypograph reformulation `tᵢ ≤ log(αᵢ)` solved as an
//! exponential-cone program. Fallback: a damped majorize-minimize scheme
//! that iterates linearized LPs `max Σ dᵢ·αᵢ/αᵢ⁽ᵗ⁾` with an exact line
//! search along the segment to the LP optimizer, stopping once the true
//! objective improves by less than `Config::concave_improve_tol`. The
//! fallback also settles degenerate instances where some αᵢ is forced to
//! zero (the cone route cannot attain those).

use super::backend::{self, RawOutcome};
use super::{
    finish, ConcaveLogProgram, Sense, SolveOutcome, SolveStatus, ALPHA_FLOOR,
    ALPHA_REPORT_ZERO,
};
use crate::config::Config;
use crate::error::Result;

/// How `solve_concave_log` attacks the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConcaveStrategy {
    /// Exponential cone first, iterative LP if that fails.
    Auto,
    ExponentialCone,
    IterativeLp,
}

/// Solve with the default strategy, [`ConcaveStrategy::Auto`].
pub fn solve_concave_log(p: &ConcaveLogProgram, cfg: &Config) -> Result<SolveOutcome> {
    solve_concave_log_with(p, ConcaveStrategy::Auto, cfg)
}

pub fn solve_concave_log_with(
    p: &ConcaveLogProgram,
    strategy: ConcaveStrategy,
    cfg: &Config,
) -> Result<SolveOutcome> {
    p.validate()?;
    let outcome = match strategy {
        ConcaveStrategy::ExponentialCone => cone(p, cfg)?,
        ConcaveStrategy::IterativeLp => iterative(p, cfg)?,
        ConcaveStrategy::Auto => {
            let first = cone(p, cfg)?;
            match first.status {
                SolveStatus::Optimal => first,
                _ => iterative(p, cfg)?,
            }
        }
    };
    Ok(report(p, outcome, cfg))
}

/// Snap tiny alphas to zero when that stays feasible, and attach the
/// recomputed log objective.
fn report(p: &ConcaveLogProgram, mut out: SolveOutcome, cfg: &Config) -> SolveOutcome {
    if out.status != SolveStatus::Optimal {
        return out;
    }
    let x = out.primal.as_mut().unwrap();
    let mut snapped = x.clone();
    for &i in &p.alpha_vars {
        if snapped[i].abs() < ALPHA_REPORT_ZERO {
            snapped[i] = 0.0;
        }
    }
    if p.base.max_violation(&snapped) <= cfg.feas_tol {
        *x = snapped;
    }
    out.objective = Some(p.objective_value(x));
    out
}

fn cone(p: &ConcaveLogProgram, cfg: &Config) -> Result<SolveOutcome> {
    let n = p.base.num_vars;
    let weighted: Vec<usize> = p
        .alpha_vars
        .iter()
        .zip(&p.weights)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&i, _)| i)
        .collect();
    if weighted.is_empty() {
        // Objective is identically zero; any feasible point is optimal.
        return Ok(finish(&p.base, backend::solve(&p.base, &[], &[], cfg)?, cfg));
    }

    let mut ext = p.base.clone();
    ext.num_vars = n + weighted.len();
    ext.objective.resize(ext.num_vars, 0.0);
    ext.lower.resize(ext.num_vars, f64::NEG_INFINITY);
    ext.upper.resize(ext.num_vars, f64::INFINITY);

    let mut exp_pairs = Vec::with_capacity(weighted.len());
    let mut obj = vec![0.0; ext.num_vars];
    let mut t_var = n;
    for (&i, &d) in p.alpha_vars.iter().zip(&p.weights) {
        if d > 0.0 {
            exp_pairs.push((i, t_var));
            // keep log arguments strictly positive for the cone route
            ext.lower[i] = ext.lower[i].max(ALPHA_FLOOR);
            obj[t_var] = -d; // minimize -Σ d t
            t_var += 1;
        }
    }

    let raw = backend::solve(&ext, &exp_pairs, &obj, cfg)?;
    Ok(match raw {
        RawOutcome::Solution(x) => {
            let primal = x[..n].to_vec();
            if p.base.max_violation(&primal) > cfg.feas_tol {
                SolveOutcome {
                    status: SolveStatus::NumericalFailure,
                    primal: None,
                    objective: None,
                }
            } else {
                SolveOutcome {
                    status: SolveStatus::Optimal,
                    primal: Some(primal),
                    objective: None,
                }
            }
        }
        RawOutcome::Infeasible => SolveOutcome {
            status: SolveStatus::Infeasible,
            primal: None,
            objective: None,
        },
        RawOutcome::Unbounded => SolveOutcome {
            status: SolveStatus::Unbounded,
            primal: None,
            objective: None,
        },
        RawOutcome::Failure => SolveOutcome {
            status: SolveStatus::NumericalFailure,
            primal: None,
            objective: None,
        },
    })
}

const MAX_MM_ITERS: usize = 1000;

fn iterative(p: &ConcaveLogProgram, cfg: &Config) -> Result<SolveOutcome> {
    // Starting point: LP maximizing Σ d·α, rescaled to unit max weight.
    let mut lp = p.base.clone();
    let d_max = p.weights.iter().cloned().fold(0.0_f64, f64::max);
    let obj: Vec<(usize, f64)> = p
        .alpha_vars
        .iter()
        .zip(&p.weights)
        .map(|(&i, &d)| (i, if d_max > 0.0 { d / d_max } else { d }))
        .collect();
    lp.set_objective(&obj, Sense::Max);
    let start = finish(&lp, backend::solve(&lp, &[], &[], cfg)?, cfg);
    if start.status != SolveStatus::Optimal {
        return Ok(start);
    }
    let mut x = start.primal.unwrap();

    // Coordinates the constraints pin to zero would dominate every
    // gradient through the log floor; probe once and exclude them.
    let dead = probe_dead_alphas(p, &x, cfg)?;
    let mut f = p.objective_value(&x);

    for _ in 0..MAX_MM_ITERS {
        // Linear surrogate: max Σ (d_i / α_i) α_i  (gradient of the log),
        // rescaled to unit max coefficient to keep the subproblem
        // well-conditioned near the boundary.
        let mut grad: Vec<(usize, f64)> = p
            .alpha_vars
            .iter()
            .zip(&p.weights)
            .filter(|(_, &d)| d > 0.0)
            .filter(|(&i, _)| !dead.contains(&i))
            .map(|(&i, &d)| (i, d / x[i].max(ALPHA_REPORT_ZERO)))
            .collect();
        if grad.is_empty() {
            break;
        }
        let scale = grad.iter().fold(0.0_f64, |m, &(_, g)| m.max(g.abs()));
        if scale > 0.0 {
            for (_, g) in grad.iter_mut() {
                *g /= scale;
            }
        }
        let mut sub = p.base.clone();
        sub.set_objective(&grad, Sense::Max);
        let out = finish(&sub, backend::solve(&sub, &[], &[], cfg)?, cfg);
        let s = match out.status {
            SolveStatus::Optimal => out.primal.unwrap(),
            SolveStatus::Unbounded => {
                return Ok(SolveOutcome {
                    status: SolveStatus::Unbounded,
                    primal: None,
                    objective: None,
                })
            }
            other => {
                return Ok(SolveOutcome {
                    status: other,
                    primal: None,
                    objective: None,
                })
            }
        };

        // Damped step: exact line search of the concave objective on [x, s].
        let gamma = line_search(p, &x, &s);
        let mut cand = x.clone();
        for i in 0..cand.len() {
            cand[i] += gamma * (s[i] - cand[i]);
        }
        let f_cand = p.objective_value(&cand);
        if f_cand <= f + cfg.concave_improve_tol {
            if f_cand > f {
                x = cand;
            }
            break;
        }
        x = cand;
        f = f_cand;
    }

    Ok(SolveOutcome {
        status: SolveStatus::Optimal,
        primal: Some(x),
        objective: None,
    })
}

/// Weighted alphas that stay at zero even when maximized directly: the
/// constraints force them there, so the log objective must skip them.
fn probe_dead_alphas(
    p: &ConcaveLogProgram,
    x: &[f64],
    cfg: &Config,
) -> Result<Vec<usize>> {
    let suspicious: Vec<(usize, f64)> = p
        .alpha_vars
        .iter()
        .zip(&p.weights)
        .filter(|&(&i, &d)| d > 0.0 && x[i] <= ALPHA_REPORT_ZERO)
        .map(|(&i, _)| (i, 1.0))
        .collect();
    if suspicious.is_empty() {
        return Ok(Vec::new());
    }
    let mut probe = p.base.clone();
    probe.set_objective(&suspicious, Sense::Max);
    let out = finish(&probe, backend::solve(&probe, &[], &[], cfg)?, cfg);
    match out.status {
        SolveStatus::Optimal => {
            let y = out.primal.unwrap();
            Ok(suspicious
                .into_iter()
                .filter(|&(i, _)| y[i] <= ALPHA_REPORT_ZERO)
                .map(|(i, _)| i)
                .collect())
        }
        // treat every suspicious coordinate as live; the line search will
        // still reject useless moves
        _ => Ok(Vec::new()),
    }
}

/// Bisection on the directional derivative of the (concave) objective along
/// `x + γ(s - x)`, γ ∈ [0, 1].
fn line_search(p: &ConcaveLogProgram, x: &[f64], s: &[f64]) -> f64 {
    let deriv = |gamma: f64| -> f64 {
        p.alpha_vars
            .iter()
            .zip(&p.weights)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&i, &d)| {
                let delta = s[i] - x[i];
                let a = (x[i] + gamma * delta).max(ALPHA_REPORT_ZERO);
                d * delta / a
            })
            .sum()
    };
    if deriv(1.0) >= 0.0 {
        return 1.0;
    }
    if deriv(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

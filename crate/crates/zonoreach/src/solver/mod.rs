//! Thin abstraction over the mathematical-programming backend.
//!
//! Two problem classes are supported: linear programs, and maximization of a
//! separable concave log objective `Σ dᵢ·log(αᵢ)` over linear constraints.
//! Everything else in the crate goes through these two entry points, so the
//! backend (Clarabel's interior-point solver) is swappable behind this module.
//!
//! Optimal primals are re-checked against the constraints independently of
//! the backend before being reported; a claimed optimum that violates any
//! constraint beyond `Config::feas_tol` is downgraded to a numerical failure.

mod backend;
mod concave;

pub use concave::{solve_concave_log, solve_concave_log_with, ConcaveStrategy};

use crate::config::Config;
use crate::error::{Error, Result};

/// Objective sense.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// Sparse linear constraint row: `Σ coeffs·x (cmp) rhs`.
#[derive(Clone, Debug)]
pub struct Row {
    /// (variable index, coefficient) pairs; indices need not be sorted.
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// A linear program with equality rows, `≤` rows and per-variable bounds.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<f64>,
    sense: Sense,
    eq_rows: Vec<Row>,
    le_rows: Vec<Row>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// A feasibility/optimization problem over `num_vars` variables, free
    /// by default, with zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            sense: Sense::Min,
            eq_rows: Vec::new(),
            le_rows: Vec::new(),
            lower: vec![f64::NEG_INFINITY; num_vars],
            upper: vec![f64::INFINITY; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_objective(&mut self, coeffs: &[(usize, f64)], sense: Sense) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for &(i, v) in coeffs {
            self.objective[i] = v;
        }
        self.sense = sense;
    }

    pub fn objective(&self) -> (&[f64], Sense) {
        (&self.objective, self.sense)
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.eq_rows.push(Row { coeffs, rhs });
    }

    pub fn add_le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.le_rows.push(Row { coeffs, rhs });
    }

    /// Set `lo ≤ xᵢ ≤ hi`; use infinities for one-sided bounds.
    pub fn set_bounds(&mut self, i: usize, lo: f64, hi: f64) {
        self.lower[i] = lo;
        self.upper[i] = hi;
    }

    pub fn num_eq_rows(&self) -> usize {
        self.eq_rows.len()
    }

    pub fn num_le_rows(&self) -> usize {
        self.le_rows.len()
    }

    /// Number of finite variable bounds (counted as constraints).
    pub fn num_finite_bounds(&self) -> usize {
        self.lower.iter().filter(|l| l.is_finite()).count()
            + self.upper.iter().filter(|u| u.is_finite()).count()
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "variable bounds lo={lo} > hi={hi}"
                )));
            }
        }
        let all_rows = self.eq_rows.iter().chain(&self.le_rows);
        for row in all_rows {
            if !row.rhs.is_finite() {
                return Err(Error::NonFinite("constraint rhs".into()));
            }
            for &(i, v) in &row.coeffs {
                if i >= self.num_vars {
                    return Err(Error::InvalidArgument(format!(
                        "constraint references variable {i} of {}",
                        self.num_vars
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite("constraint coefficient".into()));
                }
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("objective".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for row in &self.eq_rows {
            let lhs: f64 = row.coeffs.iter().map(|&(i, v)| v * x[i]).sum();
            worst = worst.max((lhs - row.rhs).abs());
        }
        for row in &self.le_rows {
            let lhs: f64 = row.coeffs.iter().map(|&(i, v)| v * x[i]).sum();
            worst = worst.max(lhs - row.rhs);
        }
        for (i, xi) in x.iter().enumerate() {
            if self.lower[i].is_finite() {
                worst = worst.max(self.lower[i] - xi);
            }
            if self.upper[i].is_finite() {
                worst = worst.max(xi - self.upper[i]);
            }
        }
        worst
    }

    fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xi)| c * xi).sum()
    }
}

/// Max-`Σ dᵢ log(αᵢ)` over the linear constraints of `base`.
///
/// `alpha_vars[k]` is the variable index carrying weight `weights[k]`; the
/// objective of `base` is ignored. Variables with zero weight are excluded
/// from the log objective and only bound-constrained.
#[derive(Clone, Debug)]
pub struct ConcaveLogProgram {
    pub base: LinearProgram,
    pub alpha_vars: Vec<usize>,
    pub weights: Vec<f64>,
}

impl ConcaveLogProgram {
    fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.alpha_vars.len() != self.weights.len() {
            return Err(Error::DimMismatch(format!(
                "{} alpha variables vs {} weights",
                self.alpha_vars.len(),
                self.weights.len()
            )));
        }
        for &w in &self.weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "log-objective weights must be finite and nonnegative, got {w}"
                )));
            }
        }
        Ok(())
    }

    /// Objective `Σ dᵢ log(αᵢ)` at `x`. Alphas are clamped to the reporting
    /// threshold for the evaluation, so solver noise in coordinates pinned
    /// at zero cannot manufacture objective changes. Zero-weight terms
    /// contribute nothing.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.alpha_vars
            .iter()
            .zip(&self.weights)
            .filter(|(_, &d)| d > 0.0)
            .map(|(&i, &d)| d * x[i].max(ALPHA_REPORT_ZERO).ln())
            .sum()
    }
}

/// Internal floor keeping log arguments positive.
pub(crate) const ALPHA_FLOOR: f64 = 1e-12;
/// Alpha values below this are reported as exactly zero.
pub(crate) const ALPHA_REPORT_ZERO: f64 = 1e-9;

/// Outcome of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Present iff `status == Optimal`.
    pub primal: Option<Vec<f64>>,
    /// Objective recomputed from the primal, in the problem's own sense.
    pub objective: Option<f64>,
}

impl SolveOutcome {
    fn failed(reason: &str) -> Self {
        let _ = reason;
        Self {
            status: SolveStatus::NumericalFailure,
            primal: None,
            objective: None,
        }
    }

    /// The primal, or a typed error for non-optimal statuses.
    pub fn expect_optimal(&self, what: &str) -> Result<&[f64]> {
        match self.status {
            SolveStatus::Optimal => Ok(self.primal.as_deref().unwrap()),
            SolveStatus::Infeasible => Err(Error::Infeasible(what.to_string())),
            SolveStatus::Unbounded => {
                Err(Error::SolverFailure(format!("{what}: unbounded")))
            }
            SolveStatus::NumericalFailure => {
                Err(Error::SolverFailure(format!("{what}: no certified status")))
            }
        }
    }
}

/// Solve a linear program.
///
/// Optimal primals are feasible within `cfg.feas_tol` (re-checked here);
/// infeasible/unbounded certificates from the backend are propagated as-is.
pub fn solve_lp(p: &LinearProgram, cfg: &Config) -> Result<SolveOutcome> {
    p.validate()?;
    let raw = backend::solve(p, &[], &[], cfg)?;
    Ok(finish(p, raw, cfg))
}

pub(crate) fn finish(p: &LinearProgram, raw: backend::RawOutcome, cfg: &Config) -> SolveOutcome {
    match raw {
        backend::RawOutcome::Solution(x) => {
            let viol = p.max_violation(&x);
            if viol > cfg.feas_tol {
                return SolveOutcome::failed("primal violates constraints");
            }
            let obj = p.objective_value(&x);
            SolveOutcome {
                status: SolveStatus::Optimal,
                primal: Some(x),
                objective: Some(obj),
            }
        }
        backend::RawOutcome::Infeasible => SolveOutcome {
            status: SolveStatus::Infeasible,
            primal: None,
            objective: None,
        },
        backend::RawOutcome::Unbounded => SolveOutcome {
            status: SolveStatus::Unbounded,
            primal: None,
            objective: None,
        },
        backend::RawOutcome::Failure => SolveOutcome::failed("backend"),
    }
}

//! Zonotopes in generator representation.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{HyperBox, ZERO_GEN_TOL};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::solver::{solve_lp, LinearProgram, Sense, SolveStatus};

/// A zonotope `{ c + Σ θᵢ gᵢ : θᵢ ∈ [-1, 1] }` in G-rep `(G, c)`.
///
/// `N = 0` denotes the singleton `{c}`. Zero-norm generator columns are
/// dropped on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Zonotope {
    generators: DMatrix<f64>,
    center: DVector<f64>,
}

impl Zonotope {
    /// Build from an `n × N` generator matrix and a length-`n` center.
    pub fn new(generators: DMatrix<f64>, center: DVector<f64>) -> Result<Self> {
        if generators.nrows() != center.len() {
            return Err(Error::DimMismatch(format!(
                "generators have {} rows, center has length {}",
                generators.nrows(),
                center.len()
            )));
        }
        if generators.iter().any(|v| !v.is_finite()) || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("zonotope".into()));
        }
        let kept: Vec<usize> = (0..generators.ncols())
            .filter(|&j| generators.column(j).norm() >= ZERO_GEN_TOL)
            .collect();
        let generators = if kept.len() == generators.ncols() {
            generators
        } else {
            let mut g = DMatrix::zeros(generators.nrows(), kept.len());
            for (out, &j) in kept.iter().enumerate() {
                g.set_column(out, &generators.column(j));
            }
            g
        };
        Ok(Self { generators, center })
    }

    /// The singleton `{c}`.
    pub fn singleton(center: DVector<f64>) -> Self {
        let n = center.len();
        Self {
            generators: DMatrix::zeros(n, 0),
            center,
        }
    }

    /// Axis-aligned zonotope `(diag(radii), mid)`.
    pub fn from_box(b: &HyperBox) -> Self {
        let n = b.dim();
        let mut g = DMatrix::zeros(n, n);
        let radii = b.radii();
        for i in 0..n {
            g[(i, i)] = radii[i];
        }
        // constructor drops zero-radius columns
        Self::new(g, b.midpoint()).expect("finite box")
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.ncols()
    }

    /// Generators-per-dimension ratio `N / n`.
    pub fn order(&self) -> f64 {
        self.generators.ncols() as f64 / self.center.len() as f64
    }

    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.generators.column(i).into_owned()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    /// Exact support function `h_Z(dir) = dirᵀc + Σᵢ |dirᵀgᵢ|`.
    pub fn support(&self, dir: &DVector<f64>) -> Result<f64> {
        if dir.len() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "direction has length {}, zonotope dimension is {}",
                dir.len(),
                self.dim()
            )));
        }
        let mut s = dir.dot(&self.center);
        for j in 0..self.generators.ncols() {
            s += dir.dot(&self.generators.column(j).into_owned()).abs();
        }
        Ok(s)
    }

    /// Image `A·Z = (A·G, A·c)`. `A` may be rectangular (`L × n`).
    pub fn linear_map(&self, a: &DMatrix<f64>) -> Result<Zonotope> {
        if a.ncols() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "map has {} columns, zonotope dimension is {}",
                a.ncols(),
                self.dim()
            )));
        }
        Zonotope::new(a * &self.generators, a * &self.center)
    }

    /// Minkowski sum: generator concatenation, center addition.
    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(format!(
                "sum of {}-dim and {}-dim zonotopes",
                self.dim(),
                other.dim()
            )));
        }
        let mut g = DMatrix::zeros(self.dim(), self.num_generators() + other.num_generators());
        for j in 0..self.num_generators() {
            g.set_column(j, &self.generators.column(j));
        }
        for j in 0..other.num_generators() {
            g.set_column(self.num_generators() + j, &other.generators.column(j));
        }
        Zonotope::new(g, &self.center + &other.center)
    }

    pub fn translate(&self, v: &DVector<f64>) -> Result<Zonotope> {
        if v.len() != self.dim() {
            return Err(Error::DimMismatch("translation vector".into()));
        }
        Zonotope::new(self.generators.clone(), &self.center + v)
    }

    /// Minkowski difference with the aligned subtrahend `([αᵢgᵢ], c')`:
    /// element-wise generator subtraction,
    /// `Z ⊖ ([αᵢgᵢ], c') = ([(1-αᵢ)gᵢ], c - c')`.
    ///
    /// The result, summed with the subtrahend, recovers `Z` exactly.
    pub fn aligned_diff(&self, alpha: &[f64], c_prime: &DVector<f64>, cfg: &Config) -> Result<Zonotope> {
        if alpha.len() != self.num_generators() {
            return Err(Error::DimMismatch(format!(
                "{} scaling factors for {} generators",
                alpha.len(),
                self.num_generators()
            )));
        }
        if c_prime.len() != self.dim() {
            return Err(Error::DimMismatch("subtrahend center".into()));
        }
        let mut g = self.generators.clone();
        for (j, &a) in alpha.iter().enumerate() {
            if !(-cfg.feas_tol..=1.0 + cfg.feas_tol).contains(&a) {
                return Err(Error::InvalidArgument(format!(
                    "alpha[{j}] = {a} outside [0, 1]"
                )));
            }
            let a = a.clamp(0.0, 1.0);
            let scaled = g.column(j) * (1.0 - a);
            g.set_column(j, &scaled);
        }
        Zonotope::new(g, &self.center - c_prime)
    }

    /// Membership via the feasibility LP `∃θ ∈ [-1,1]^N : c + Gθ = x`.
    ///
    /// Internally minimizes `max|θᵢ|`, so boundary queries resolve with a
    /// margin; a solver breakdown surfaces as an error, never as `false`.
    pub fn contains_point(&self, x: &DVector<f64>, cfg: &Config) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch("query point".into()));
        }
        let n_gen = self.num_generators();
        if n_gen == 0 {
            return Ok((x - &self.center).norm() <= cfg.feas_tol);
        }
        // vars: theta (N), t; min t s.t. G theta = x - c, -t <= theta_i <= t
        let mut lp = LinearProgram::new(n_gen + 1);
        lp.set_objective(&[(n_gen, 1.0)], Sense::Min);
        for r in 0..self.dim() {
            let coeffs: Vec<(usize, f64)> = (0..n_gen)
                .map(|j| (j, self.generators[(r, j)]))
                .filter(|&(_, v)| v != 0.0)
                .collect();
            lp.add_eq(coeffs, x[r] - self.center[r]);
        }
        for j in 0..n_gen {
            lp.add_le(vec![(j, 1.0), (n_gen, -1.0)], 0.0);
            lp.add_le(vec![(j, -1.0), (n_gen, -1.0)], 0.0);
        }
        lp.set_bounds(n_gen, 0.0, f64::INFINITY);
        let out = solve_lp(&lp, cfg)?;
        match out.status {
            SolveStatus::Optimal => Ok(out.objective.unwrap() <= 1.0 + cfg.feas_tol),
            SolveStatus::Infeasible => Ok(false), // x outside the affine hull
            SolveStatus::Unbounded => Err(Error::SolverFailure(
                "containment LP reported unbounded".into(),
            )),
            SolveStatus::NumericalFailure => Err(Error::SolverFailure(
                "containment LP failed to certify a status".into(),
            )),
        }
    }

    /// Tight axis-aligned bounding box.
    pub fn bounding_box(&self) -> HyperBox {
        let n = self.dim();
        let mut lo = self.center.clone();
        let mut hi = self.center.clone();
        for i in 0..n {
            let mut r = 0.0;
            for j in 0..self.num_generators() {
                r += self.generators[(i, j)].abs();
            }
            lo[i] -= r;
            hi[i] += r;
        }
        HyperBox::new(lo, hi).expect("finite zonotope")
    }

    /// A point of the zonotope: `c + Gθ` with `θ` uniform on `[-1,1]^N`.
    /// Covers the set (non-uniformly in volume).
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let mut x = self.center.clone();
        for j in 0..self.num_generators() {
            let theta: f64 = rng.gen_range(-1.0..=1.0);
            x += self.generators.column(j) * theta;
        }
        x
    }
}

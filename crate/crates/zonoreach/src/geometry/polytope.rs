//! H-rep and V-rep polytopes, axis-aligned boxes, and the disturbance-set
//! wrapper that keeps both representations at hand.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::Zonotope;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::solver::{solve_lp, LinearProgram, Sense, SolveStatus};

/// Polyhedron `{ x : Hx ≤ h }` in hyperplane representation.
#[derive(Clone, Debug, PartialEq)]
pub struct HPolytope {
    matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl HPolytope {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != rhs.len() {
            return Err(Error::DimMismatch(format!(
                "{} half-space rows vs {} offsets",
                matrix.nrows(),
                rhs.len()
            )));
        }
        if matrix.iter().any(|v| !v.is_finite()) || rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("H-rep".into()));
        }
        Ok(Self { matrix, rhs })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        let lhs = &self.matrix * x;
        lhs.iter().zip(self.rhs.iter()).all(|(l, r)| *l <= r + tol)
    }

    /// Substitute `x = E⁻¹ y`: the H-rep of the image `E·{x : Hx ≤ h}` for an
    /// invertible map, `(H E⁻¹, h)`.
    pub fn image_through(&self, e: &DMatrix<f64>) -> Result<HPolytope> {
        if e.nrows() != e.ncols() || e.ncols() != self.dim() {
            return Err(Error::DimMismatch("image map must be square".into()));
        }
        let inv = e
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("image map is singular".into()))?;
        HPolytope::new(&self.matrix * inv, self.rhs.clone())
    }

    /// Nonempty and bounded in every coordinate direction, decided by LPs.
    pub fn check_bounded_nonempty(&self, cfg: &Config) -> Result<bool> {
        for i in 0..self.dim() {
            for sense in [Sense::Min, Sense::Max] {
                let mut lp = LinearProgram::new(self.dim());
                lp.set_objective(&[(i, 1.0)], sense);
                for r in 0..self.num_rows() {
                    let coeffs: Vec<(usize, f64)> = (0..self.dim())
                        .map(|c| (c, self.matrix[(r, c)]))
                        .filter(|&(_, v)| v != 0.0)
                        .collect();
                    lp.add_le(coeffs, self.rhs[r]);
                }
                let out = solve_lp(&lp, cfg)?;
                match out.status {
                    SolveStatus::Optimal => {}
                    SolveStatus::Infeasible | SolveStatus::Unbounded => return Ok(false),
                    SolveStatus::NumericalFailure => {
                        return Err(Error::SolverFailure("boundedness LP".into()))
                    }
                }
            }
        }
        Ok(true)
    }
}

/// Polytope as the convex hull of finitely many vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct VPolytope {
    vertices: Vec<DVector<f64>>,
}

impl VPolytope {
    pub fn new(vertices: Vec<DVector<f64>>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("V-rep needs at least one vertex".into()));
        }
        let dim = vertices[0].len();
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimMismatch("vertices of mixed dimension".into()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("V-rep".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }
}

/// Axis-aligned box `[lower, upper]`, convertible losslessly to the other
/// representations.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperBox {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

/// Vertex enumeration guard: boxes beyond this dimension have too many
/// corners to expand into a V-rep.
const MAX_VERTEX_DIM: usize = 20;

impl HyperBox {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimMismatch("box bounds".into()));
        }
        if lower.iter().any(|v| !v.is_finite()) || upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("box".into()));
        }
        if lower.iter().zip(upper.iter()).any(|(l, u)| l > u) {
            return Err(Error::InvalidArgument("box with lower > upper".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Symmetric box `[-r, r]` per coordinate.
    pub fn symmetric(radii: &DVector<f64>) -> Result<Self> {
        Self::new(-radii.clone(), radii.clone())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    pub fn midpoint(&self) -> DVector<f64> {
        (&self.lower + &self.upper) * 0.5
    }

    pub fn radii(&self) -> DVector<f64> {
        (&self.upper - &self.lower) * 0.5
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper.iter()))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol)
    }

    pub fn to_zonotope(&self) -> Zonotope {
        Zonotope::from_box(self)
    }

    /// `2n` half-space rows.
    pub fn to_hpolytope(&self) -> HPolytope {
        let n = self.dim();
        let mut m = DMatrix::zeros(2 * n, n);
        let mut rhs = DVector::zeros(2 * n);
        for i in 0..n {
            m[(i, i)] = 1.0;
            rhs[i] = self.upper[i];
            m[(n + i, i)] = -1.0;
            rhs[n + i] = -self.lower[i];
        }
        HPolytope::new(m, rhs).expect("finite box")
    }

    /// All `2ⁿ` corners.
    pub fn to_vpolytope(&self) -> Result<VPolytope> {
        let n = self.dim();
        if n > MAX_VERTEX_DIM {
            return Err(Error::InvalidArgument(format!(
                "refusing to enumerate 2^{n} box vertices"
            )));
        }
        let count = 1usize << n;
        let mut vertices = Vec::with_capacity(count);
        for mask in 0..count {
            let mut v = DVector::zeros(n);
            for i in 0..n {
                v[i] = if mask & (1 << i) != 0 {
                    self.upper[i]
                } else {
                    self.lower[i]
                };
            }
            vertices.push(v);
        }
        VPolytope::new(vertices)
    }

    pub fn sample_uniform<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            if self.lower[i] == self.upper[i] {
                self.lower[i]
            } else {
                rng.gen_range(self.lower[i]..=self.upper[i])
            }
        })
    }
}

/// The disturbance set `W`, with whichever representations the recursion's
/// subproblems need (V-rep for the covering LP, H-rep for the inner fit).
#[derive(Clone, Debug)]
pub enum DisturbanceSet {
    Box(HyperBox),
    Polytope { hrep: HPolytope, vrep: VPolytope },
}

impl DisturbanceSet {
    pub fn dim(&self) -> usize {
        match self {
            DisturbanceSet::Box(b) => b.dim(),
            DisturbanceSet::Polytope { hrep, .. } => hrep.dim(),
        }
    }

    pub fn vertices(&self) -> Result<Vec<DVector<f64>>> {
        match self {
            DisturbanceSet::Box(b) => Ok(b.to_vpolytope()?.vertices().to_vec()),
            DisturbanceSet::Polytope { vrep, .. } => Ok(vrep.vertices().to_vec()),
        }
    }

    pub fn hrep(&self) -> HPolytope {
        match self {
            DisturbanceSet::Box(b) => b.to_hpolytope(),
            DisturbanceSet::Polytope { hrep, .. } => hrep.clone(),
        }
    }

    /// G-rep of `W`; only boxes are zonotopes here.
    pub fn as_zonotope(&self) -> Option<Zonotope> {
        match self {
            DisturbanceSet::Box(b) => Some(b.to_zonotope()),
            DisturbanceSet::Polytope { .. } => None,
        }
    }

    pub fn as_box(&self) -> Option<&HyperBox> {
        match self {
            DisturbanceSet::Box(b) => Some(b),
            DisturbanceSet::Polytope { .. } => None,
        }
    }

    /// Cross-representation sanity: H-rep bounded and nonempty, and every
    /// vertex feasible for the H-rep.
    pub fn validate(&self, cfg: &Config) -> Result<()> {
        match self {
            DisturbanceSet::Box(_) => Ok(()),
            DisturbanceSet::Polytope { hrep, vrep } => {
                if hrep.dim() != vrep.dim() {
                    return Err(Error::DimMismatch("W H-rep vs V-rep".into()));
                }
                if !hrep.check_bounded_nonempty(cfg)? {
                    return Err(Error::InvalidArgument(
                        "disturbance H-rep is empty or unbounded".into(),
                    ));
                }
                for (j, v) in vrep.vertices().iter().enumerate() {
                    if !hrep.contains(v, cfg.feas_tol) {
                        return Err(Error::InvalidArgument(format!(
                            "disturbance vertex {j} violates its own H-rep"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

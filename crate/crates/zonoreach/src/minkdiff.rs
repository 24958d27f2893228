//! Template-aligned inner/outer approximation of `EW` and the resulting
//! Minkowski-difference sandwich, plus the containment-LP baseline.
//!
//! Both approximations of `EW` are aligned with the minuend `Z` (their
//! generators are `αᵢ·gᵢ` with `αᵢ ∈ [0,1]`), so the differences
//! `Z ⊖ (outer)` and `Z ⊖ (inner)` reduce to generator-wise subtraction and
//! sandwich the true difference:
//! `Z ⊖ outer ⊆ Z ⊖ EW ⊆ Z ⊖ inner`.

use nalgebra::{DMatrix, DVector};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::{support_dominates, DisturbanceSet, HPolytope, HyperBox, VPolytope, Zonotope};
use crate::solver::{
    solve_concave_log, solve_lp, ConcaveLogProgram, LinearProgram, Sense, SolveStatus,
};

/// Zero heuristic weights are lifted to this so the covering LP keeps
/// strictly positive costs.
const WEIGHT_FLOOR: f64 = 1e-6;

/// A zonotope aligned with some template `Z = (G, c)`: realizes as
/// `([α₁g₁, …, α_N g_N], center)`.
#[derive(Clone, Debug)]
pub struct ScaledTemplate {
    pub alpha: DVector<f64>,
    pub center: DVector<f64>,
}

impl ScaledTemplate {
    /// The aligned zonotope `([αᵢgᵢ], center)` for the given template.
    pub fn realize(&self, template: &Zonotope) -> Result<Zonotope> {
        if self.alpha.len() != template.num_generators() {
            return Err(Error::DimMismatch(format!(
                "{} scalings for template with {} generators",
                self.alpha.len(),
                template.num_generators()
            )));
        }
        let mut g = template.generators().clone();
        for j in 0..g.ncols() {
            let col = g.column(j) * self.alpha[j];
            g.set_column(j, &col);
        }
        Zonotope::new(g, self.center.clone())
    }
}

/// The two-sided difference produced by [`sandwich_diff`].
#[derive(Clone, Debug)]
pub struct DiffResult {
    /// `Z ⊖ (outer approx of EW)` — a subset of `Z ⊖ EW`.
    pub under: Zonotope,
    /// `Z ⊖ (inner approx of EW)` — a superset of `Z ⊖ EW`.
    pub over: Zonotope,
    pub outer_template: ScaledTemplate,
    pub inner_template: ScaledTemplate,
}

/// Decision-variable count of the covering LP: `θ` block plus `α` plus `c`.
pub fn minout_variable_count(n_gens: usize, n_vertices: usize, dim: usize) -> usize {
    n_gens * n_vertices + n_gens + dim
}

/// Constraint rows of the covering LP (vertex equalities and the
/// `|θᵢⱼ| ≤ αᵢ` pairs), excluding variable bounds.
pub fn minout_constraint_count(n_gens: usize, n_vertices: usize, dim: usize) -> usize {
    n_vertices * dim + 2 * n_gens * n_vertices
}

/// Reported problem-size metric for the containment LP:
/// `N(N + N_W) + N + n` (the Γ scaling block, α, and the placed center).
/// The full encoding additionally carries the center-certificate column γ
/// (`N` more variables) and absolute-value auxiliaries for the ∞-norm rows.
pub fn sadraddini_variable_count(n_gens: usize, n_w_gens: usize, dim: usize) -> usize {
    n_gens * (n_gens + n_w_gens) + n_gens + dim
}

/// All structural decision variables of the containment LP (Γ, γ, α, c),
/// before the ∞-norm auxiliaries.
pub fn sadraddini_structural_count(n_gens: usize, n_w_gens: usize, dim: usize) -> usize {
    n_gens * (n_gens + n_w_gens) + 2 * n_gens + dim
}

/// Smallest (in weighted α) zonotope aligned with `Z` that covers `EW`,
/// from the LP over `W`'s vertices: every `E·wⱼ` must be expressible as
/// `c + Σᵢ θᵢⱼ gᵢ` with `|θᵢⱼ| ≤ αᵢ ≤ 1`.
///
/// Infeasibility means no aligned sub-zonotope of `Z` can cover `EW`
/// anywhere — the under chain terminates empty.
pub fn outer_approx_min_out(
    z: &Zonotope,
    e: &DMatrix<f64>,
    w_vertices: &VPolytope,
    b: &[f64],
    cfg: &Config,
) -> Result<ScaledTemplate> {
    let n = z.dim();
    let n_gen = z.num_generators();
    let m = w_vertices.num_vertices();
    if e.nrows() != n || e.ncols() != w_vertices.dim() {
        return Err(Error::DimMismatch(format!(
            "E is {}x{}, expected {}x{}",
            e.nrows(),
            e.ncols(),
            n,
            w_vertices.dim()
        )));
    }
    if b.len() != n_gen {
        return Err(Error::DimMismatch("one b weight per generator".into()));
    }
    if b.iter().any(|&w| !w.is_finite() || w <= 0.0) {
        return Err(Error::InvalidArgument("b weights must be positive".into()));
    }

    // vars: theta (j-major, N*M), alpha (N), c (n)
    let theta = |i: usize, j: usize| j * n_gen + i;
    let alpha0 = n_gen * m;
    let c0 = alpha0 + n_gen;
    let mut lp = LinearProgram::new(c0 + n);
    debug_assert_eq!(lp.num_vars(), minout_variable_count(n_gen, m, n));

    // Rescale the cost to unit max weight; the argmin is unchanged and the
    // solver's gap tolerance then binds alpha itself, not b·alpha, which
    // matters when all weights sit at the 1e-6 floor.
    let b_max = b.iter().cloned().fold(0.0_f64, f64::max);
    let obj: Vec<(usize, f64)> = (0..n_gen).map(|i| (alpha0 + i, b[i] / b_max)).collect();
    lp.set_objective(&obj, Sense::Min);

    let g = z.generators();
    for (j, w) in w_vertices.vertices().iter().enumerate() {
        let ew = e * w;
        for r in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n_gen + 1);
            for i in 0..n_gen {
                if g[(r, i)] != 0.0 {
                    coeffs.push((theta(i, j), g[(r, i)]));
                }
            }
            coeffs.push((c0 + r, 1.0));
            lp.add_eq(coeffs, ew[r]);
        }
        for i in 0..n_gen {
            lp.add_le(vec![(theta(i, j), 1.0), (alpha0 + i, -1.0)], 0.0);
            lp.add_le(vec![(theta(i, j), -1.0), (alpha0 + i, -1.0)], 0.0);
        }
    }
    for i in 0..n_gen {
        lp.set_bounds(alpha0 + i, 0.0, 1.0);
    }

    let out = solve_lp(&lp, cfg)?;
    match out.status {
        SolveStatus::Optimal => {
            let x = out.primal.unwrap();
            let alpha = DVector::from_fn(n_gen, |i, _| x[alpha0 + i].clamp(0.0, 1.0));
            let center = DVector::from_fn(n, |r, _| x[c0 + r]);
            Ok(ScaledTemplate { alpha, center })
        }
        SolveStatus::Infeasible => Err(Error::EmptyUnderApprox(
            "no aligned sub-zonotope of the template covers EW".into(),
        )),
        SolveStatus::Unbounded => Err(Error::SolverFailure(
            "covering LP reported unbounded".into(),
        )),
        SolveStatus::NumericalFailure => {
            Err(Error::SolverFailure("covering LP failed".into()))
        }
    }
}

/// Largest (in weighted log-volume) zonotope aligned with `Z` that fits
/// inside `EW`, from `max Σ dᵢ log(αᵢ)` subject to `Hc + |HG|α ≤ h`.
///
/// `w_hrep` must describe the image set `EW` in the state space; when `e`
/// is invertible the conversion `(H E⁻¹, h)` is applied here, otherwise
/// pass `e = I` and supply `EW`'s H-rep directly.
pub fn inner_approx_max_in(
    z: &Zonotope,
    e: &DMatrix<f64>,
    w_hrep: &HPolytope,
    d: &[f64],
    cfg: &Config,
) -> Result<ScaledTemplate> {
    let n = z.dim();
    let n_gen = z.num_generators();
    if d.len() != n_gen {
        return Err(Error::DimMismatch("one d weight per generator".into()));
    }
    let hrep = if e.is_identity(0.0) {
        if w_hrep.dim() != n {
            return Err(Error::DimMismatch("H-rep dimension".into()));
        }
        w_hrep.clone()
    } else {
        if e.nrows() != n {
            return Err(Error::DimMismatch("E rows".into()));
        }
        if e.nrows() != e.ncols() {
            return Err(Error::InvalidArgument(
                "non-square E: supply the H-rep of EW directly with E = I".into(),
            ));
        }
        w_hrep.image_through(e).map_err(|_| {
            Error::InvalidArgument(
                "singular E: supply the H-rep of EW directly with E = I".into(),
            )
        })?
    };

    // vars: alpha (N), c (n)
    let mut base = LinearProgram::new(n_gen + n);
    let h = hrep.matrix();
    let rhs = hrep.rhs();
    let g = z.generators();
    for l in 0..hrep.num_rows() {
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n_gen + n);
        for i in 0..n_gen {
            let mut dot = 0.0;
            for r in 0..n {
                dot += h[(l, r)] * g[(r, i)];
            }
            if dot != 0.0 {
                coeffs.push((i, dot.abs()));
            }
        }
        for r in 0..n {
            if h[(l, r)] != 0.0 {
                coeffs.push((n_gen + r, h[(l, r)]));
            }
        }
        base.add_le(coeffs, rhs[l]);
    }
    for i in 0..n_gen {
        base.set_bounds(i, 0.0, 1.0);
    }

    let program = ConcaveLogProgram {
        base,
        alpha_vars: (0..n_gen).collect(),
        weights: d.to_vec(),
    };
    let out = solve_concave_log(&program, cfg)?;
    match out.status {
        SolveStatus::Optimal => {
            let x = out.primal.unwrap();
            let alpha = DVector::from_fn(n_gen, |i, _| x[i].clamp(0.0, 1.0));
            let center = DVector::from_fn(n, |r, _| x[n_gen + r]);
            Ok(ScaledTemplate { alpha, center })
        }
        SolveStatus::Infeasible => Err(Error::Infeasible(
            "inner approximation: EW is empty".into(),
        )),
        _ => Err(Error::SolverFailure("inner-fit solve failed".into())),
    }
}

/// Heuristic covering weights `bᵢ = ‖Tgᵢ‖₁ − ‖Tgᵢ‖∞` with `T` the
/// pseudo-inverse of `E`, favoring generators aligned with the columns of
/// `E`; derived for hyper-rectangular `W`. Rank-deficient `E` falls back to
/// `bᵢ = ‖gᵢ‖₂`. Zero weights are lifted to `1e-6`.
pub fn default_b_weights(z: &Zonotope, e: &DMatrix<f64>, w: &HyperBox) -> Result<Vec<f64>> {
    if e.nrows() != z.dim() || e.ncols() != w.dim() {
        return Err(Error::DimMismatch("E against Z and W".into()));
    }
    let g = z.generators();
    let t = pseudo_inverse_full_rank(e);
    let weights = match t {
        Some(t) => (0..g.ncols())
            .map(|i| {
                let v = &t * g.column(i);
                let l1: f64 = v.iter().map(|x| x.abs()).sum();
                let linf: f64 = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                (l1 - linf).max(WEIGHT_FLOOR)
            })
            .collect(),
        None => (0..g.ncols())
            .map(|i| g.column(i).norm().max(WEIGHT_FLOOR))
            .collect(),
    };
    Ok(weights)
}

/// Inner-fit weights `dᵢ = ‖gᵢ‖₂` (Euclidean reading of the norm heuristic).
pub fn default_d_weights(z: &Zonotope) -> Vec<f64> {
    let g = z.generators();
    (0..g.ncols()).map(|i| g.column(i).norm()).collect()
}

/// `T = (EᵀE)⁻¹Eᵀ` or `Eᵀ(EEᵀ)⁻¹` depending on shape; `None` if `E` is not
/// full rank (smallest singular value below 1e-10).
fn pseudo_inverse_full_rank(e: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let svd = e.clone().svd(false, false);
    let min_sv = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_sv <= 1e-10 || svd.singular_values.len() < e.nrows().min(e.ncols()) {
        return None;
    }
    if e.nrows() >= e.ncols() {
        let ete = e.transpose() * e;
        ete.try_inverse().map(|inv| inv * e.transpose())
    } else {
        let eet = e * e.transpose();
        eet.try_inverse().map(|inv| e.transpose() * inv)
    }
}

/// Both sides of the Minkowski-difference sandwich for `Z ⊖ EW`.
///
/// `W` must carry H- and V-reps (boxes do). Omitted weights fall back to
/// the documented heuristics. Requires invertible `E` for non-identity `E`
/// (the inner fit needs `EW`'s H-rep).
pub fn sandwich_diff(
    z: &Zonotope,
    e: &DMatrix<f64>,
    w: &DisturbanceSet,
    b: Option<&[f64]>,
    d: Option<&[f64]>,
    cfg: &Config,
) -> Result<DiffResult> {
    let b_owned;
    let b = match b {
        Some(b) => b,
        None => {
            b_owned = match w.as_box() {
                Some(wb) => default_b_weights(z, e, wb)?,
                None => default_d_weights(z)
                    .into_iter()
                    .map(|x| x.max(WEIGHT_FLOOR))
                    .collect(),
            };
            &b_owned
        }
    };
    let d_owned;
    let d = match d {
        Some(d) => d,
        None => {
            d_owned = default_d_weights(z);
            &d_owned
        }
    };

    let vrep = VPolytope::new(w.vertices()?)?;
    let outer_template = outer_approx_min_out(z, e, &vrep, b, cfg)?;
    let inner_template = inner_approx_max_in(z, e, &w.hrep(), d, cfg)?;

    let under = z.aligned_diff(outer_template.alpha.as_slice(), &outer_template.center, cfg)?;
    let over = z.aligned_diff(inner_template.alpha.as_slice(), &inner_template.center, cfg)?;

    let dirs = cfg.containment_dirs_per_dim * z.dim();
    if !support_dominates(&under, &over, dirs, 0, cfg.feas_tol)? {
        return Err(Error::SolverFailure(
            "sandwich violated: under ⊄ over numerically".into(),
        ));
    }

    Ok(DiffResult {
        under,
        over,
        outer_template,
        inner_template,
    })
}

/// Sufficient zonotope-containment certificate: `true` means `inner ⊆
/// outer` (witnessed by `G_inner = G_outer·Γ`, `c_outer − c_inner =
/// G_outer·γ`, `‖[Γ, γ]‖∞ ≤ 1`); `false` only means no such certificate
/// exists. Exact containment is co-NP-hard, so this pairs with the
/// sampling falsifier [`crate::geometry::support_dominates`]: the LP
/// certifies, the sampler refutes.
pub fn certify_containment(inner: &Zonotope, outer: &Zonotope, cfg: &Config) -> Result<bool> {
    if inner.dim() != outer.dim() {
        return Err(Error::DimMismatch("containment operands".into()));
    }
    let n = inner.dim();
    let n_in = inner.num_generators();
    let n_out = outer.num_generators();
    let g_out = outer.generators();
    let g_in = inner.generators();

    // vars: Gamma (col-major, N_out × N_in), gamma (N_out),
    //       T = |Gamma| aux, t = |gamma| aux
    let gamma_mat = |i: usize, q: usize| q * n_out + i;
    let gamma0 = n_out * n_in;
    let t0 = gamma0 + n_out;
    let tg0 = t0 + n_out * n_in;
    let mut lp = LinearProgram::new(tg0 + n_out);
    for q in 0..n_in {
        for r in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n_out);
            for i in 0..n_out {
                if g_out[(r, i)] != 0.0 {
                    coeffs.push((gamma_mat(i, q), g_out[(r, i)]));
                }
            }
            lp.add_eq(coeffs, g_in[(r, q)]);
        }
    }
    for r in 0..n {
        let coeffs: Vec<(usize, f64)> = (0..n_out)
            .filter(|&i| g_out[(r, i)] != 0.0)
            .map(|i| (gamma0 + i, g_out[(r, i)]))
            .collect();
        lp.add_eq(coeffs, outer.center()[r] - inner.center()[r]);
    }
    for i in 0..n_out {
        for q in 0..n_in {
            lp.add_le(vec![(gamma_mat(i, q), 1.0), (t0 + gamma_mat(i, q), -1.0)], 0.0);
            lp.add_le(vec![(gamma_mat(i, q), -1.0), (t0 + gamma_mat(i, q), -1.0)], 0.0);
        }
        lp.add_le(vec![(gamma0 + i, 1.0), (tg0 + i, -1.0)], 0.0);
        lp.add_le(vec![(gamma0 + i, -1.0), (tg0 + i, -1.0)], 0.0);
        let mut row: Vec<(usize, f64)> = (0..n_in).map(|q| (t0 + gamma_mat(i, q), 1.0)).collect();
        row.push((tg0 + i, 1.0));
        lp.add_le(row, 1.0);
    }
    let out = solve_lp(&lp, cfg)?;
    match out.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::Infeasible => Ok(false),
        _ => Err(Error::SolverFailure("containment certificate LP failed".into())),
    }
}

/// Containment-LP baseline: the largest aligned `(G_Z diag(α), c)` with
/// `(G_Z diag(α), c) ⊕ EW ⊆ Z`, certified by the linear encoding
/// `[G_Z diag(α), E G_W] = G_Z Γ`, `c_Z − (c + E c_W) = G_Z γ`,
/// `‖[Γ, γ]‖∞ ≤ 1`, maximizing `Σ αᵢ`.
pub fn under_approx_sadraddini(
    z: &Zonotope,
    e: &DMatrix<f64>,
    w_zono: &Zonotope,
    cfg: &Config,
) -> Result<ScaledTemplate> {
    let n = z.dim();
    let n_gen = z.num_generators();
    let n_w = w_zono.num_generators();
    if e.nrows() != n || e.ncols() != w_zono.dim() {
        return Err(Error::DimMismatch("E against Z and W".into()));
    }
    let eg_w = e * w_zono.generators();
    let ec_w = e * w_zono.center();
    let g_z = z.generators();

    // vars: Gamma (col-major, N*(N+Nw)), gamma (N), alpha (N), c (n),
    //       T abs(Gamma) (N*(N+Nw)), t abs(gamma) (N)
    let cols = n_gen + n_w;
    let gamma_mat = |i: usize, q: usize| q * n_gen + i;
    let gamma0 = n_gen * cols;
    let alpha0 = gamma0 + n_gen;
    let c0 = alpha0 + n_gen;
    let t0 = c0 + n;
    let tg0 = t0 + n_gen * cols;
    let mut lp = LinearProgram::new(tg0 + n_gen);
    debug_assert_eq!(
        c0 + n,
        sadraddini_structural_count(n_gen, n_w, n),
        "structural variable layout"
    );

    let obj: Vec<(usize, f64)> = (0..n_gen).map(|i| (alpha0 + i, 1.0)).collect();
    lp.set_objective(&obj, Sense::Max);

    // G_Z Γ[:,q] = α_q g_q  (q < N)  or  (E G_W)[:, q-N]
    for q in 0..cols {
        for r in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n_gen + 1);
            for i in 0..n_gen {
                if g_z[(r, i)] != 0.0 {
                    coeffs.push((gamma_mat(i, q), g_z[(r, i)]));
                }
            }
            if q < n_gen {
                coeffs.push((alpha0 + q, -g_z[(r, q)]));
                lp.add_eq(coeffs, 0.0);
            } else {
                lp.add_eq(coeffs, eg_w[(r, q - n_gen)]);
            }
        }
    }
    // G_Z γ + c = c_Z − E c_W
    for r in 0..n {
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(n_gen + 1);
        for i in 0..n_gen {
            if g_z[(r, i)] != 0.0 {
                coeffs.push((gamma0 + i, g_z[(r, i)]));
            }
        }
        coeffs.push((c0 + r, 1.0));
        lp.add_eq(coeffs, z.center()[r] - ec_w[r]);
    }
    // |Γ| ≤ T, |γ| ≤ t, row sums ≤ 1
    for i in 0..n_gen {
        for q in 0..cols {
            lp.add_le(vec![(gamma_mat(i, q), 1.0), (t0 + gamma_mat(i, q), -1.0)], 0.0);
            lp.add_le(vec![(gamma_mat(i, q), -1.0), (t0 + gamma_mat(i, q), -1.0)], 0.0);
        }
        lp.add_le(vec![(gamma0 + i, 1.0), (tg0 + i, -1.0)], 0.0);
        lp.add_le(vec![(gamma0 + i, -1.0), (tg0 + i, -1.0)], 0.0);
        let mut row: Vec<(usize, f64)> = (0..cols).map(|q| (t0 + gamma_mat(i, q), 1.0)).collect();
        row.push((tg0 + i, 1.0));
        lp.add_le(row, 1.0);
    }
    for i in 0..n_gen {
        lp.set_bounds(alpha0 + i, 0.0, 1.0);
    }

    let out = solve_lp(&lp, cfg)?;
    match out.status {
        SolveStatus::Optimal => {
            let x = out.primal.unwrap();
            let alpha = DVector::from_fn(n_gen, |i, _| x[alpha0 + i].clamp(0.0, 1.0));
            let center = DVector::from_fn(n, |r, _| x[c0 + r]);
            Ok(ScaledTemplate { alpha, center })
        }
        SolveStatus::Infeasible => Err(Error::EmptyUnderApprox(
            "EW does not fit inside Z at any placement".into(),
        )),
        _ => Err(Error::SolverFailure("containment LP failed".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> Config {
        Config::default()
    }

    fn unit_square() -> Zonotope {
        Zonotope::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap()
    }

    fn box_w(radius: f64) -> HyperBox {
        HyperBox::symmetric(&dvector![radius, radius]).unwrap()
    }

    fn eye(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn min_out_box_in_box_is_exact() {
        // interval oracle: covering [-0.2,0.2]^2 with scalings of [-1,1]^2
        // needs exactly alpha = 0.2; anything smaller excludes a vertex.
        let v = box_w(0.2).to_vpolytope().unwrap();
        let t = outer_approx_min_out(&unit_square(), &eye(2), &v, &[1.0, 1.0], &cfg()).unwrap();
        assert!((t.alpha[0] - 0.2).abs() < 1e-6);
        assert!((t.alpha[1] - 0.2).abs() < 1e-6);
        assert!(t.center.norm() < 1e-6);
    }

    #[test]
    fn min_out_single_point_at_center() {
        let v = VPolytope::new(vec![DVector::zeros(2)]).unwrap();
        let t = outer_approx_min_out(&unit_square(), &eye(2), &v, &[1.0, 1.0], &cfg()).unwrap();
        assert!(t.alpha.norm() < 1e-6);
        assert!(t.center.norm() < 1e-6);
    }

    #[test]
    fn min_out_oversized_w_is_empty_under_approx() {
        // covering [-2,2]^2 would need alpha = 2 > 1
        let v = box_w(2.0).to_vpolytope().unwrap();
        let r = outer_approx_min_out(&unit_square(), &eye(2), &v, &[1.0, 1.0], &cfg());
        assert!(matches!(r, Err(Error::EmptyUnderApprox(_))));
    }

    #[test]
    fn min_out_vertices_are_covered() {
        // Prop-1 certificate on random low-dimensional instances.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.gen_range(2..=4usize);
            let ngen = rng.gen_range(n..=3 * n);
            let g = DMatrix::from_fn(n, ngen, |_, _| rng.gen_range(-1.0..1.0));
            let z = match Zonotope::new(g, DVector::zeros(n)) {
                Ok(z) if z.num_generators() >= n => z,
                _ => continue,
            };
            let mean_norm = default_d_weights(&z).iter().sum::<f64>() / z.num_generators() as f64;
            let radii = DVector::from_fn(n, |_, _| rng.gen_range(0.05..0.15) * mean_norm);
            let wbox = HyperBox::symmetric(&radii).unwrap();
            let e = eye(n);
            let b = default_b_weights(&z, &e, &wbox).unwrap();
            let t = match outer_approx_min_out(&z, &e, &wbox.to_vpolytope().unwrap(), &b, &cfg()) {
                Ok(t) => t,
                Err(Error::EmptyUnderApprox(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let cover = t.realize(&z).unwrap();
            for v in wbox.to_vpolytope().unwrap().vertices() {
                assert!(
                    cover.contains_point(v, &cfg()).unwrap(),
                    "vertex escaped the cover"
                );
            }
        }
    }

    #[test]
    fn min_out_problem_size_formulas() {
        assert_eq!(minout_variable_count(3, 4, 2), 3 * 4 + 3 + 2);
        assert_eq!(minout_constraint_count(3, 4, 2), 4 * 2 + 2 * 3 * 4);
    }

    #[test]
    fn max_in_box_in_box_is_exact() {
        let t = inner_approx_max_in(
            &unit_square(),
            &eye(2),
            &box_w(0.2).to_hpolytope(),
            &[1.0, 1.0],
            &cfg(),
        )
        .unwrap();
        assert!((t.alpha[0] - 0.2).abs() < 1e-6, "{:?}", t.alpha);
        assert!((t.alpha[1] - 0.2).abs() < 1e-6);
        assert!(t.center.norm() < 1e-6);
    }

    #[test]
    fn max_in_single_point_forces_zero_alpha() {
        // EW = {p}: H-rep x <= p, -x <= -p
        let p = dvector![0.3, -0.1];
        let mut m = DMatrix::zeros(4, 2);
        let mut rhs = DVector::zeros(4);
        for i in 0..2 {
            m[(i, i)] = 1.0;
            rhs[i] = p[i];
            m[(2 + i, i)] = -1.0;
            rhs[2 + i] = -p[i];
        }
        let hrep = HPolytope::new(m, rhs).unwrap();
        let t = inner_approx_max_in(&unit_square(), &eye(2), &hrep, &[1.0, 1.0], &cfg()).unwrap();
        assert_eq!(t.alpha[0], 0.0);
        assert_eq!(t.alpha[1], 0.0);
        assert!((t.center - p).norm() < 1e-6);
    }

    #[test]
    fn max_in_segment_inside_square() {
        // one-generator template [e1] in 2D against EW = [-0.3,0.3]^2:
        // constraint rows give |H g1| alpha <= h - H c, so alpha = 0.3.
        let z = Zonotope::new(dmatrix![1.0; 0.0], DVector::zeros(2)).unwrap();
        let t = inner_approx_max_in(&z, &eye(2), &box_w(0.3).to_hpolytope(), &[1.0], &cfg()).unwrap();
        assert!((t.alpha[0] - 0.3).abs() < 1e-6);
        assert!(t.center[0].abs() < 1e-6);
        assert!(t.center[1].abs() <= 0.3 + 1e-6);
    }

    #[test]
    fn max_in_certificate_rows_hold() {
        // Prop-2: H c + |H G_alpha| 1 <= h row-wise.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let n = rng.gen_range(2..=4usize);
            let ngen = rng.gen_range(n..=3 * n);
            let g = DMatrix::from_fn(n, ngen, |_, _| rng.gen_range(-1.0..1.0));
            let z = match Zonotope::new(g, DVector::zeros(n)) {
                Ok(z) if z.num_generators() >= 1 => z,
                _ => continue,
            };
            let mean_norm = default_d_weights(&z).iter().sum::<f64>() / z.num_generators() as f64;
            let radii = DVector::from_fn(n, |_, _| rng.gen_range(0.05..0.3) * mean_norm);
            let hrep = HyperBox::symmetric(&radii).unwrap().to_hpolytope();
            let d = default_d_weights(&z);
            let t = inner_approx_max_in(&z, &eye(n), &hrep, &d, &cfg()).unwrap();
            let fit = t.realize(&z).unwrap();
            for l in 0..hrep.num_rows() {
                let hl = hrep.matrix().row(l).transpose();
                let mut lhs = hl.dot(&t.center);
                for j in 0..fit.num_generators() {
                    lhs += hl.dot(&fit.generator(j)).abs();
                }
                assert!(lhs <= hrep.rhs()[l] + 1e-7, "certificate row {l} violated");
            }
        }
    }

    #[test]
    fn sandwich_boxes_are_exact_both_sides() {
        let w = DisturbanceSet::Box(box_w(0.2));
        let r = sandwich_diff(&unit_square(), &eye(2), &w, None, None, &cfg()).unwrap();
        for z in [&r.under, &r.over] {
            assert_eq!(z.num_generators(), 2);
            let g = z.generators();
            assert!((g[(0, 0)].abs() - 0.8).abs() < 1e-6);
            assert!((g[(1, 1)].abs() - 0.8).abs() < 1e-6);
            assert!(z.center().norm() < 1e-6);
        }
    }

    #[test]
    fn sandwich_with_singleton_w_is_identity() {
        let w = DisturbanceSet::Box(HyperBox::symmetric(&dvector![0.0, 0.0]).unwrap());
        let r = sandwich_diff(&unit_square(), &eye(2), &w, None, None, &cfg()).unwrap();
        for z in [&r.under, &r.over] {
            assert!(support_dominates(z, &unit_square(), 128, 3, 1e-6).unwrap());
            assert!(support_dominates(&unit_square(), z, 128, 4, 1e-6).unwrap());
        }
    }

    #[test]
    fn sandwich_support_oracle_on_hexagon() {
        // under ⊆ over, and under's support never exceeds h_Z - h_EW
        // (the support-function difference upper-bounds the true difference).
        let z = Zonotope::new(dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0], DVector::zeros(2)).unwrap();
        let wbox = box_w(0.1);
        let w = DisturbanceSet::Box(wbox.clone());
        let r = sandwich_diff(&z, &eye(2), &w, None, None, &cfg()).unwrap();
        assert!(support_dominates(&r.under, &r.over, 256, 5, 1e-7).unwrap());
        let ew = wbox.to_zonotope();
        for dir in crate::geometry::unit_directions(2, 256, 17) {
            let lhs = r.under.support(&dir).unwrap();
            let rhs = z.support(&dir).unwrap() - ew.support(&dir).unwrap();
            assert!(lhs <= rhs + 1e-7);
        }
    }

    #[test]
    fn exactness_on_axis_aligned_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let n = rng.gen_range(1..=4usize);
            let r: DVector<f64> = DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0));
            let rho: DVector<f64> = DVector::from_fn(n, |i, _| r[i] * rng.gen_range(0.1..0.9));
            let cz = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let cw = DVector::from_fn(n, |_, _| rng.gen_range(-0.1..0.1));
            let z = Zonotope::new(DMatrix::from_diagonal(&r), cz.clone()).unwrap();
            let w = DisturbanceSet::Box(
                HyperBox::new(&cw - &rho, &cw + &rho).unwrap(),
            );
            let out = sandwich_diff(&z, &eye(n), &w, None, None, &cfg()).unwrap();
            for zres in [&out.under, &out.over] {
                assert!((zres.center() - (&cz - &cw)).norm() < 1e-6);
                // diag(r - rho) up to column order
                let mut got: Vec<f64> = (0..zres.num_generators())
                    .map(|j| zres.generator(j).amax())
                    .collect();
                let mut want: Vec<f64> = (0..n).map(|i| r[i] - rho[i]).collect();
                got.sort_by(|a, b| a.partial_cmp(b).unwrap());
                want.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(got.len(), want.len());
                for (g, w) in got.iter().zip(&want) {
                    assert!((g - w).abs() < 1e-6, "expected {w}, got {g}");
                }
            }
        }
    }

    #[test]
    fn sadraddini_box_in_box() {
        let w = box_w(0.2).to_zonotope();
        let t = under_approx_sadraddini(&unit_square(), &eye(2), &w, &cfg()).unwrap();
        assert!((t.alpha[0] - 0.8).abs() < 1e-6);
        assert!((t.alpha[1] - 0.8).abs() < 1e-6);
        assert!(t.center.norm() < 1e-6);
    }

    #[test]
    fn sadraddini_singleton_w_gives_full_alpha() {
        let w = Zonotope::singleton(DVector::zeros(2));
        let t = under_approx_sadraddini(&unit_square(), &eye(2), &w, &cfg()).unwrap();
        assert!((t.alpha[0] - 1.0).abs() < 1e-6);
        assert!((t.alpha[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sadraddini_soundness_result_plus_ew_inside_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for trial in 0..15 {
            let n = rng.gen_range(2..=4usize);
            let ngen = rng.gen_range(n..=2 * n);
            let g = DMatrix::from_fn(n, ngen, |_, _| rng.gen_range(-1.0..1.0));
            let z = match Zonotope::new(g, DVector::zeros(n)) {
                Ok(z) if z.num_generators() >= n => z,
                _ => continue,
            };
            let mean_norm = default_d_weights(&z).iter().sum::<f64>() / z.num_generators() as f64;
            let radii = DVector::from_fn(n, |_, _| rng.gen_range(0.05..0.2) * mean_norm);
            let wz = HyperBox::symmetric(&radii).unwrap().to_zonotope();
            let e = eye(n);
            let t = match under_approx_sadraddini(&z, &e, &wz, &cfg()) {
                Ok(t) => t,
                Err(Error::EmptyUnderApprox(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            let result = t.realize(&z).unwrap();
            let ew = wz.linear_map(&e).unwrap();
            let sum = result.minkowski_sum(&ew).unwrap();
            assert!(
                support_dominates(&sum, &z, 64 * n, trial, 1e-6).unwrap(),
                "result ⊕ EW escaped Z"
            );
        }
    }

    #[test]
    fn sadraddini_count_formulas() {
        assert_eq!(sadraddini_variable_count(3, 2, 4), 3 * 5 + 3 + 4);
        assert_eq!(sadraddini_structural_count(3, 2, 4), 3 * 5 + 6 + 4);
    }

    #[test]
    fn b_weights_match_hand_computation() {
        // axis-aligned generator: ||e1||_1 - ||e1||_inf = 0, lifted to 1e-6
        let z = Zonotope::new(dmatrix![1.0, 1.0; 0.0, 1.0], DVector::zeros(2)).unwrap();
        let b = default_b_weights(&z, &eye(2), &box_w(0.1)).unwrap();
        assert_eq!(b[0], 1e-6);
        // (1,1): 2 - 1 = 1
        assert!((b[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn b_weights_rank_deficient_fallback() {
        let z = Zonotope::new(dmatrix![1.0, 3.0; 0.0, 4.0], DVector::zeros(2)).unwrap();
        let e = DMatrix::zeros(2, 2);
        let b = default_b_weights(&z, &e, &box_w(0.1)).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12);
        assert!((b[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn d_weights_are_generator_norms() {
        let z = Zonotope::new(dmatrix![3.0, 0.0; 4.0, 2.0], DVector::zeros(2)).unwrap();
        let d = default_d_weights(&z);
        assert_eq!(d, vec![5.0, 2.0]);
    }

    #[test]
    fn realize_validates_length() {
        let t = ScaledTemplate {
            alpha: dvector![0.5],
            center: DVector::zeros(2),
        };
        assert!(t.realize(&unit_square()).is_err());
    }

    #[test]
    fn containment_certificate_agrees_with_falsifier() {
        let small = Zonotope::new(DMatrix::identity(2, 2) * 0.8, dvector![0.1, 0.0]).unwrap();
        let big = unit_square();
        assert!(certify_containment(&small, &big, &cfg()).unwrap());
        assert!(!certify_containment(&big, &small, &cfg()).unwrap());
        // rotated square inside the hexagon template
        let rot = Zonotope::new(dmatrix![0.5, 0.5; 0.5, -0.5], DVector::zeros(2)).unwrap();
        let hex = Zonotope::new(dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0], DVector::zeros(2)).unwrap();
        assert!(certify_containment(&rot, &hex, &cfg()).unwrap());
        assert!(support_dominates(&rot, &hex, 128, 1, 1e-9).unwrap());
    }

    #[test]
    fn certificate_handles_singletons() {
        let p = Zonotope::singleton(dvector![0.5, 0.5]);
        assert!(certify_containment(&p, &unit_square(), &cfg()).unwrap());
        let q = Zonotope::singleton(dvector![1.5, 0.0]);
        assert!(!certify_containment(&q, &unit_square(), &cfg()).unwrap());
    }
}

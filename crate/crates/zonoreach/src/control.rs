//! Reachability control law from stored BRS data, and a closed-loop
//! simulator with disturbance policies.
//!
//! For a state `x ∈ Z̲ₖ₊₁`, a feasible input is any `u ∈ U` with
//! `A x + B u + K ∈ diff_under[k]`, the saved difference set; by
//! construction `A x + B u + E w + K ∈ Z̲ₖ` then holds for every `w ∈ W`.
//! No projection is performed: one feasibility LP per step suffices.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::brs::{BrsSequence, SystemModel};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::DisturbanceSet;
use crate::solver::{solve_lp, LinearProgram, Sense, SolveStatus};

/// How the simulator draws disturbances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisturbancePolicy {
    Zero,
    /// Uniform over `W`.
    Uniform,
    /// Uniform over the vertices of `W` (worst cases live there).
    VertexAdversarial,
}

/// One closed-loop run. States run `x₀ … x_T`, inputs and disturbances
/// `0 … T-1`; `success` records `x_T ∈ Z₀`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    pub disturbances: Vec<DVector<f64>>,
    pub success: bool,
}

impl Trajectory {
    /// Largest dynamics residual `‖x_{t+1} − (Ax_t + Bu_t + Ew_t + K)‖∞`
    /// over the run; recorded trajectories replay exactly.
    pub fn replay_error(&self, sys: &SystemModel) -> f64 {
        let mut worst = 0.0_f64;
        for t in 0..self.inputs.len() {
            let pred = sys.step(&self.states[t], &self.inputs[t], &self.disturbances[t]);
            worst = worst.max((&self.states[t + 1] - pred).amax());
        }
        worst
    }

    /// CSV rows `t, x…, u…, w…, in_target`; input/disturbance cells are
    /// empty on the final row.
    pub fn write_csv<W: std::io::Write>(
        &self,
        out: &mut W,
        in_target: &[bool],
    ) -> std::io::Result<()> {
        let n = self.states[0].len();
        let m = self.inputs.first().map_or(0, |u| u.len());
        let p = self.disturbances.first().map_or(0, |w| w.len());
        write!(out, "t")?;
        for i in 1..=n {
            write!(out, ",x{i}")?;
        }
        for i in 1..=m {
            write!(out, ",u{i}")?;
        }
        for i in 1..=p {
            write!(out, ",w{i}")?;
        }
        writeln!(out, ",in_target")?;
        for (t, x) in self.states.iter().enumerate() {
            write!(out, "{t}")?;
            for v in x.iter() {
                write!(out, ",{v}")?;
            }
            if t < self.inputs.len() {
                for v in self.inputs[t].iter() {
                    write!(out, ",{v}")?;
                }
                for v in self.disturbances[t].iter() {
                    write!(out, ",{v}")?;
                }
            } else {
                for _ in 0..m + p {
                    write!(out, ",")?;
                }
            }
            writeln!(out, ",{}", in_target[t])?;
        }
        Ok(())
    }
}

/// Feedback controller over a computed [`BrsSequence`].
#[derive(Clone, Copy, Debug)]
pub struct Controller<'a> {
    sys: &'a SystemModel,
    seq: &'a BrsSequence,
    /// Secondary mode: among feasible inputs, centralize the landing point
    /// by minimizing `max |θᵢ|`. Off by default — any feasible `u` works.
    pub centered: bool,
}

impl<'a> Controller<'a> {
    pub fn new(sys: &'a SystemModel, seq: &'a BrsSequence) -> Self {
        Self {
            sys,
            seq,
            centered: false,
        }
    }

    /// Steps the stored difference chain supports.
    pub fn horizon(&self) -> usize {
        self.seq.horizon()
    }

    pub fn sequence(&self) -> &BrsSequence {
        self.seq
    }

    /// An input `u ∈ U` with `A x + B u + K ∈ diff_under[step_k]`,
    /// guaranteeing one-step progress `x → Z̲ₖ` under every disturbance.
    /// Infeasibility means the precondition `x ∈ Z̲ₖ₊₁` was violated and
    /// surfaces as a typed error.
    pub fn one_step_input(
        &self,
        x: &DVector<f64>,
        step_k: usize,
        cfg: &Config,
    ) -> Result<DVector<f64>> {
        let diff = self.seq.diff_under.get(step_k).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "step {step_k} beyond stored horizon {}",
                self.seq.horizon()
            ))
        })?;
        if x.len() != self.sys.dim() {
            return Err(Error::DimMismatch("state".into()));
        }
        let u_set = self.sys.u();
        let n_u = u_set.num_generators();
        let n_th = diff.num_generators();
        let n = self.sys.dim();

        // vars: xi (N_U), theta (N_diff), [t if centered]
        let nvars = n_u + n_th + usize::from(self.centered);
        let mut lp = LinearProgram::new(nvars);
        // B G_U xi − G_diff theta = c_diff − A x − B c_U − K
        let bgu = self.sys.b() * u_set.generators();
        let rhs_vec = diff.center()
            - self.sys.a() * x
            - self.sys.b() * u_set.center()
            - self.sys.k();
        for r in 0..n {
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for j in 0..n_u {
                if bgu[(r, j)] != 0.0 {
                    coeffs.push((j, bgu[(r, j)]));
                }
            }
            for j in 0..n_th {
                let v = diff.generators()[(r, j)];
                if v != 0.0 {
                    coeffs.push((n_u + j, -v));
                }
            }
            lp.add_eq(coeffs, rhs_vec[r]);
        }
        for j in 0..n_u {
            lp.set_bounds(j, -1.0, 1.0);
        }
        if self.centered {
            let t = n_u + n_th;
            lp.set_objective(&[(t, 1.0)], Sense::Min);
            lp.set_bounds(t, 0.0, 1.0);
            for j in 0..n_th {
                lp.add_le(vec![(n_u + j, 1.0), (t, -1.0)], 0.0);
                lp.add_le(vec![(n_u + j, -1.0), (t, -1.0)], 0.0);
            }
        } else {
            for j in 0..n_th {
                lp.set_bounds(n_u + j, -1.0, 1.0);
            }
        }

        let out = solve_lp(&lp, cfg)?;
        match out.status {
            SolveStatus::Optimal => {
                let sol = out.primal.unwrap();
                let xi = DVector::from_fn(n_u, |j, _| sol[j].clamp(-1.0, 1.0));
                Ok(u_set.center() + u_set.generators() * xi)
            }
            SolveStatus::Infeasible => Err(Error::Infeasible(format!(
                "no admissible input reaches the stored difference set; \
                 the state is outside the step-{} under-approximation",
                step_k + 1
            ))),
            _ => Err(Error::SolverFailure("one-step input LP failed".into())),
        }
    }

    /// Closed loop from `x₀ ∈ Z̲_K` for the full stored horizon `K`.
    /// Deterministic under the seed. A mid-run infeasibility is a soundness
    /// bug by the theory and is reported as a hard error.
    pub fn simulate(
        &self,
        x0: &DVector<f64>,
        policy: DisturbancePolicy,
        seed: u64,
        cfg: &Config,
    ) -> Result<Trajectory> {
        let horizon = self.seq.horizon();
        if !self.seq.under[horizon].contains_point(x0, cfg)? {
            return Err(Error::Infeasible(
                "x0 is outside the deepest under-approximation".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut states = vec![x0.clone()];
        let mut inputs = Vec::with_capacity(horizon);
        let mut disturbances = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let k = horizon - 1 - t;
            let x = states.last().unwrap().clone();
            let u = self.one_step_input(&x, k, cfg)?;
            let w = sample_disturbance(self.sys.w(), policy, &mut rng)?;
            states.push(self.sys.step(&x, &u, &w));
            inputs.push(u);
            disturbances.push(w);
        }
        let success = self.seq.under[0].contains_point(states.last().unwrap(), cfg)?;
        Ok(Trajectory {
            states,
            inputs,
            disturbances,
            success,
        })
    }
}

fn sample_disturbance<R: Rng>(
    w: &DisturbanceSet,
    policy: DisturbancePolicy,
    rng: &mut R,
) -> Result<DVector<f64>> {
    match policy {
        DisturbancePolicy::Zero => Ok(DVector::zeros(w.dim())),
        DisturbancePolicy::Uniform => match w {
            DisturbanceSet::Box(b) => Ok(b.sample_uniform(rng)),
            DisturbanceSet::Polytope { hrep, vrep } => {
                // rejection sampling in the vertex bounding box
                let dim = vrep.dim();
                let mut lo = vrep.vertices()[0].clone();
                let mut hi = lo.clone();
                for v in vrep.vertices() {
                    for i in 0..dim {
                        lo[i] = lo[i].min(v[i]);
                        hi[i] = hi[i].max(v[i]);
                    }
                }
                let bb = crate::geometry::HyperBox::new(lo, hi)?;
                for _ in 0..10_000 {
                    let cand = bb.sample_uniform(rng);
                    if hrep.contains(&cand, 0.0) {
                        return Ok(cand);
                    }
                }
                Err(Error::SolverFailure(
                    "rejection sampling of W failed to land inside".into(),
                ))
            }
        },
        DisturbancePolicy::VertexAdversarial => {
            let verts = w.vertices()?;
            Ok(verts[rng.gen_range(0..verts.len())].clone())
        }
    }
}

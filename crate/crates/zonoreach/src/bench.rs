//! Benchmark harness: random-instance comparison of the two
//! Minkowski-difference under-approximations, and single-merge order
//! reduction quality.
//!
//! Instance distribution (documented so runs are reproducible): template
//! generator columns i.i.d. standard normal with zero center; `W` a
//! symmetric box with radii i.i.d. uniform in `[0.05, 0.3]` times the mean
//! generator norm; `E = I + 0.1·(normal perturbation)`, re-sampled until
//! well-conditioned. Every instance derives its RNG from the run seed and
//! its instance id, so results are byte-identical under a fixed seed and
//! independent of the worker pool. Wall times are reported separately from
//! the deterministic result rows.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::geometry::sampling::normal;
use crate::geometry::{volume_exact, HyperBox, Zonotope};
use crate::minkdiff::{
    default_b_weights, minout_constraint_count, minout_variable_count, outer_approx_min_out,
    sadraddini_variable_count, under_approx_sadraddini,
};
use crate::reduction::reduce_once;

/// One method run on one instance.
#[derive(Clone, Debug)]
pub struct MinkdiffRecord {
    pub id: usize,
    pub n: usize,
    /// Template generator count.
    pub n_gens: usize,
    /// Vertex count of `W` (drives the covering LP size).
    pub m_vertices: usize,
    /// Generator count of `W` (drives the containment LP size).
    pub n_w: usize,
    pub method: &'static str,
    pub status: &'static str,
    /// Decision-variable metric of the formulation.
    pub vars: usize,
    /// Constraint-row metric of the formulation.
    pub constraints: usize,
    /// Exact volume of the obtained under-approximation, when tractable.
    pub volume: Option<f64>,
    pub wall_ms: f64,
}

/// Volume-ratio sample `r₂ = (V_sadraddini / V_min-out)^(1/n)`.
#[derive(Clone, Copy, Debug)]
pub struct RatioSample {
    pub id: usize,
    pub n: usize,
    pub r2: f64,
}

#[derive(Clone, Debug)]
pub struct MinkdiffBenchParams {
    pub dims: Vec<usize>,
    pub orders: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct MinkdiffBenchOutput {
    pub records: Vec<MinkdiffRecord>,
    pub ratios: Vec<RatioSample>,
}

fn instance_rng(seed: u64, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E3779B97F4A7C15))
}

/// Zero-centered template with `round(order·n)` i.i.d. standard-normal
/// generator columns — the benchmark instance distribution.
pub fn random_template<R: Rng>(n: usize, order: f64, rng: &mut R) -> Zonotope {
    let n_gens = ((order * n as f64).round() as usize).max(1);
    let g = DMatrix::from_fn(n, n_gens, |_, _| normal(rng));
    Zonotope::new(g, DVector::zeros(n)).expect("finite random generators")
}

fn random_well_conditioned_e<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let e = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.1 * normal(rng));
        let svd = e.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin > 1e-3 && smax / smin < 1e3 {
            return e;
        }
    }
}

fn random_w_box<R: Rng>(z: &Zonotope, rng: &mut R) -> HyperBox {
    let mean_norm = (0..z.num_generators())
        .map(|j| z.generator(j).norm())
        .sum::<f64>()
        / z.num_generators().max(1) as f64;
    let radii = DVector::from_fn(z.dim(), |_, _| rng.gen_range(0.05..0.3) * mean_norm);
    HyperBox::symmetric(&radii).expect("finite radii")
}

fn volume_if_tractable(z: &Zonotope, cfg: &Config) -> Option<f64> {
    if z.dim() > 4 {
        return None;
    }
    volume_exact(z, cfg.volume_comb_cap).ok()
}

/// Run the min-out vs containment-LP comparison on `count` random
/// instances. Rows come back sorted by `(id, method)` regardless of the
/// worker pool's schedule.
pub fn run_minkdiff_bench(params: &MinkdiffBenchParams, cfg: &Config) -> Result<MinkdiffBenchOutput> {
    if params.dims.is_empty() || params.orders.is_empty() {
        return Err(Error::InvalidArgument("need at least one dim and order".into()));
    }
    if params.dims.iter().any(|&d| !(2..=10).contains(&d)) {
        return Err(Error::InvalidArgument("dims must lie in 2..=10".into()));
    }
    let results: Vec<(Vec<MinkdiffRecord>, Option<RatioSample>)> = (0..params.count)
        .into_par_iter()
        .map(|id| run_minkdiff_instance(id, params, cfg))
        .collect();

    let mut records = Vec::with_capacity(2 * params.count);
    let mut ratios = Vec::new();
    for (recs, ratio) in results {
        records.extend(recs);
        if let Some(r) = ratio {
            ratios.push(r);
        }
    }
    records.sort_by_key(|r| (r.id, r.method));
    ratios.sort_by_key(|r| r.id);
    Ok(MinkdiffBenchOutput { records, ratios })
}

fn run_minkdiff_instance(
    id: usize,
    params: &MinkdiffBenchParams,
    cfg: &Config,
) -> (Vec<MinkdiffRecord>, Option<RatioSample>) {
    let mut rng = instance_rng(params.seed, id);
    let n = params.dims[rng.gen_range(0..params.dims.len())];
    let order = params.orders[rng.gen_range(0..params.orders.len())];
    let z = random_template(n, order, &mut rng);
    let e = random_well_conditioned_e(n, &mut rng);
    let wbox = random_w_box(&z, &mut rng);
    let n_gens = z.num_generators();
    let m = 1usize << n;
    let n_w = wbox.to_zonotope().num_generators();

    let base = MinkdiffRecord {
        id,
        n,
        n_gens,
        m_vertices: m,
        n_w,
        method: "",
        status: "",
        vars: 0,
        constraints: 0,
        volume: None,
        wall_ms: 0.0,
    };

    // covering LP route
    let t0 = std::time::Instant::now();
    let minout_vol = (|| -> Result<Option<f64>> {
        let b = default_b_weights(&z, &e, &wbox)?;
        let t = outer_approx_min_out(&z, &e, &wbox.to_vpolytope()?, &b, cfg)?;
        let under = z.aligned_diff(t.alpha.as_slice(), &t.center, cfg)?;
        Ok(volume_if_tractable(&under, cfg))
    })();
    let minout_ms = t0.elapsed().as_secs_f64() * 1e3;
    let minout_rec = MinkdiffRecord {
        method: "min-out",
        status: match &minout_vol {
            Ok(Some(_)) => "ok",
            Ok(None) => "ok-novolume",
            Err(Error::EmptyUnderApprox(_)) => "empty",
            Err(_) => "failed",
        },
        vars: minout_variable_count(n_gens, m, n),
        constraints: minout_constraint_count(n_gens, m, n),
        volume: minout_vol.as_ref().ok().copied().flatten(),
        wall_ms: minout_ms,
        ..base.clone()
    };

    // containment LP route
    let t1 = std::time::Instant::now();
    let sad_vol = (|| -> Result<Option<f64>> {
        let t = under_approx_sadraddini(&z, &e, &wbox.to_zonotope(), cfg)?;
        let under = t.realize(&z)?;
        Ok(volume_if_tractable(&under, cfg))
    })();
    let sad_ms = t1.elapsed().as_secs_f64() * 1e3;
    let sad_rec = MinkdiffRecord {
        method: "sadraddini",
        status: match &sad_vol {
            Ok(Some(_)) => "ok",
            Ok(None) => "ok-novolume",
            Err(Error::EmptyUnderApprox(_)) => "empty",
            Err(_) => "failed",
        },
        vars: sadraddini_variable_count(n_gens, n_w, n),
        constraints: sadraddini_constraints(n_gens, n_w, n),
        volume: sad_vol.as_ref().ok().copied().flatten(),
        wall_ms: sad_ms,
        ..base
    };

    let ratio = match (minout_rec.volume, sad_rec.volume) {
        (Some(v_min), Some(v_sad)) if v_min > 0.0 => Some(RatioSample {
            id,
            n,
            r2: (v_sad / v_min).powf(1.0 / n as f64),
        }),
        _ => None,
    };
    (vec![minout_rec, sad_rec], ratio)
}

/// Documented row metric for the containment LP: the matrix-equality block,
/// the center row block, and the ∞-norm row sums.
pub fn sadraddini_constraints(n_gens: usize, n_w: usize, dim: usize) -> usize {
    dim * (n_gens + n_w) + dim + n_gens
}

/// Summary statistics over the ratio samples.
#[derive(Clone, Copy, Debug)]
pub struct RatioSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// Fraction of samples inside `[0.95, 1.05]`.
    pub within_tight_band: f64,
    /// Fraction of samples inside `[0.8, 1.3]`.
    pub within_wide_band: f64,
}

pub fn summarize_ratios(ratios: &[RatioSample]) -> Option<RatioSummary> {
    if ratios.is_empty() {
        return None;
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().map(|r| r.r2).sum::<f64>() / n;
    let var = ratios.iter().map(|r| (r.r2 - mean).powi(2)).sum::<f64>() / n;
    let min = ratios.iter().map(|r| r.r2).fold(f64::INFINITY, f64::min);
    let max = ratios.iter().map(|r| r.r2).fold(f64::NEG_INFINITY, f64::max);
    let tight = ratios.iter().filter(|r| (0.95..=1.05).contains(&r.r2)).count() as f64 / n;
    let wide = ratios.iter().filter(|r| (0.8..=1.3).contains(&r.r2)).count() as f64 / n;
    Some(RatioSummary {
        count: ratios.len(),
        mean,
        std: var.sqrt(),
        min,
        max,
        within_tight_band: tight,
        within_wide_band: wide,
    })
}

/// Deterministic rows: everything except wall time.
pub fn write_minkdiff_results_csv<W: std::io::Write>(
    out: &mut W,
    records: &[MinkdiffRecord],
) -> std::io::Result<()> {
    writeln!(out, "id,n,N,M,N_W,method,status,vars,constraints,volume")?;
    for r in records {
        write!(
            out,
            "{},{},{},{},{},{},{},{},{},",
            r.id, r.n, r.n_gens, r.m_vertices, r.n_w, r.method, r.status, r.vars, r.constraints
        )?;
        match r.volume {
            Some(v) => writeln!(out, "{v}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}

pub fn write_ratios_csv<W: std::io::Write>(
    out: &mut W,
    ratios: &[RatioSample],
) -> std::io::Result<()> {
    writeln!(out, "id,n,r2")?;
    for r in ratios {
        writeln!(out, "{},{},{}", r.id, r.n, r.r2)?;
    }
    Ok(())
}

pub fn write_minkdiff_timings_csv<W: std::io::Write>(
    out: &mut W,
    records: &[MinkdiffRecord],
) -> std::io::Result<()> {
    writeln!(out, "id,method,wall_ms")?;
    for r in records {
        writeln!(out, "{},{},{}", r.id, r.method, r.wall_ms)?;
    }
    Ok(())
}

/// One single-merge reduction on one random instance.
#[derive(Clone, Debug)]
pub struct ReduceRecord {
    pub id: usize,
    pub n: usize,
    pub n_gens: usize,
    pub order: f64,
    pub status: &'static str,
    /// `vol(merged) / vol(original)`, when exact volume is tractable.
    pub ratio: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ReduceBenchParams {
    pub dims: Vec<usize>,
    pub orders: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

pub fn run_reduce_bench(params: &ReduceBenchParams, cfg: &Config) -> Result<Vec<ReduceRecord>> {
    if params.dims.is_empty() || params.orders.is_empty() {
        return Err(Error::InvalidArgument("need at least one dim and order".into()));
    }
    let mut records: Vec<ReduceRecord> = (0..params.count)
        .into_par_iter()
        .map(|id| {
            let mut rng = instance_rng(params.seed, id);
            let n = params.dims[rng.gen_range(0..params.dims.len())];
            let order = params.orders[rng.gen_range(0..params.orders.len())];
            let z = random_template(n, order, &mut rng);
            let t0 = std::time::Instant::now();
            let merged = reduce_once(&z);
            let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
            let (status, ratio) = match merged {
                Ok((m, _)) => {
                    let ratio = match (volume_if_tractable(&z, cfg), volume_if_tractable(&m, cfg)) {
                        (Some(v0), Some(v1)) if v0 > 0.0 => Some(v1 / v0),
                        _ => None,
                    };
                    ("ok", ratio)
                }
                Err(_) => ("failed", None),
            };
            ReduceRecord {
                id,
                n,
                n_gens: z.num_generators(),
                order: z.order(),
                status,
                ratio,
                wall_ms,
            }
        })
        .collect();
    records.sort_by_key(|r| r.id);
    Ok(records)
}

pub fn write_reduce_results_csv<W: std::io::Write>(
    out: &mut W,
    records: &[ReduceRecord],
) -> std::io::Result<()> {
    writeln!(out, "id,n,N,order,status,volume_ratio")?;
    for r in records {
        write!(out, "{},{},{},{},{},", r.id, r.n, r.n_gens, r.order, r.status)?;
        match r.ratio {
            Some(v) => writeln!(out, "{v}")?,
            None => writeln!(out)?,
        }
    }
    Ok(())
}

pub fn write_reduce_timings_csv<W: std::io::Write>(
    out: &mut W,
    records: &[ReduceRecord],
) -> std::io::Result<()> {
    writeln!(out, "id,wall_ms")?;
    for r in records {
        writeln!(out, "{},{}", r.id, r.wall_ms)?;
    }
    Ok(())
}

//! Built-in case studies: 6D aircraft lateral/longitudinal position
//! control, a 10D double integrator with an uncontrollable subspace, and a
//! 1D demo instance.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problem::{
    BoxSpec, Dec, DisturbanceSpec, OptionsSpec, ProblemFile, SystemSpec, ZonotopeSpec,
    SCHEMA_VERSION,
};

fn rows(data: &[&[f64]]) -> Vec<Vec<Dec>> {
    data.iter()
        .map(|r| r.iter().map(|&x| Dec(x)).collect())
        .collect()
}

fn dec_vec(data: &[f64]) -> Vec<Dec> {
    data.iter().map(|&x| Dec(x)).collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<Dec>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| Dec(m[(i, j)])).collect())
        .collect()
}

fn box_zonotope_spec(lo: &[f64], hi: &[f64]) -> ZonotopeSpec {
    let n = lo.len();
    let mut gens = vec![vec![Dec(0.0); n]; n];
    let mut center = Vec::with_capacity(n);
    for i in 0..n {
        gens[i][i] = Dec((hi[i] - lo[i]) / 2.0);
        center.push(Dec((hi[i] + lo[i]) / 2.0));
    }
    ZonotopeSpec {
        generators: gens,
        center,
    }
}

fn symmetric_box(radii: &[f64]) -> DisturbanceSpec {
    DisturbanceSpec {
        box_spec: Some(BoxSpec {
            lo: dec_vec(&radii.iter().map(|r| -r).collect::<Vec<_>>()),
            hi: dec_vec(radii),
        }),
        hrep: None,
        vrep: None,
    }
}

const PI: f64 = std::f64::consts::PI;

/// A named built-in problem: `lateral`, `longitudinal`, `integrator10d`,
/// or `demo1d`.
pub fn builtin_case(name: &str) -> Result<ProblemFile> {
    match name {
        "lateral" => Ok(lateral()),
        "longitudinal" => Ok(longitudinal()),
        "integrator10d" => Ok(integrator10d()),
        "demo1d" => Ok(demo1d()),
        other => Err(Error::InvalidArgument(format!(
            "unknown case \"{other}\" (want lateral | longitudinal | integrator10d | demo1d)"
        ))),
    }
}

pub fn builtin_case_names() -> &'static [&'static str] {
    &["lateral", "longitudinal", "integrator10d", "demo1d"]
}

/// Linearized 6D aircraft lateral dynamics; states
/// `[v, p, r, phi, psi, y]`, inputs `[delta_a, delta_r]`.
fn lateral() -> ProblemFile {
    let a = rows(&[
        &[1.004, 0.1408, 0.3095, -0.3112, 0.0, 0.0],
        &[0.03015, 1.177, 0.6016, -0.6029, 0.0, 0.0],
        &[-0.02448, -0.1877, 0.3803, 0.5642, 0.0, 0.0],
        &[-0.01057, -0.09588, -0.3343, 1.277, 0.0, 0.0],
        &[0.0003943, 0.0095901, -0.005341, -0.007447, 1.0, 0.0],
        &[-0.2579, -23.32, -51.03, 61.35, -37.86, 1.0],
    ]);
    let b = rows(&[
        &[-0.1189, 0.007812],
        &[-0.1217, 0.2643],
        &[0.01773, -0.2219],
        &[-0.02882, -0.09982],
        &[-0.0005607, 0.002437],
        &[0.1120, -0.5785],
    ]);
    let e = matrix_rows(&DMatrix::identity(6, 6));
    let z0 = box_zonotope_spec(
        &[-1.0, -1.0, -1.0, -PI / 5.0, -PI / 5.0, -2.0],
        &[1.0, 1.0, 1.0, PI / 5.0, PI / 5.0, 2.0],
    );
    let u = box_zonotope_spec(&[-PI, -PI], &[PI, PI]);
    ProblemFile {
        version: SCHEMA_VERSION.into(),
        system: SystemSpec {
            a,
            b,
            e,
            k: dec_vec(&[0.0; 6]),
        },
        u,
        w: symmetric_box(&[0.037, 0.00166, 0.0078, 0.00124, 0.00107, 0.07229]),
        target: z0,
        horizon: 50,
        options: OptionsSpec {
            max_order: Dec(6.0),
            ..Default::default()
        },
    }
}

/// Linearized 6D aircraft longitudinal dynamics; states
/// `[u, w, q, theta, x, h]`, inputs `[delta_e, delta_t]`.
fn longitudinal() -> ProblemFile {
    let a = rows(&[
        &[0.9911, -0.04858, -0.01709, -0.4883, 0.0, 0.0],
        &[0.0005870, 0.9968, 0.5168, -0.0001398, 0.0, 0.0],
        &[0.0002070, -0.001123, 0.9936, -5.092e-5, 0.0, 0.0],
        &[1.907, -1.032, 0.01832, 1.0, 0.0, 0.0],
        &[-0.04601, 0.001125, 0.0002638, 0.01130, 1.0, 0.0],
        &[-5.095e-5, -0.1874, -0.01185, 4.004, 0.0, 1.0],
    ]);
    let b = rows(&[
        &[1.504, 7.349e-5],
        &[-0.04645, -3.421e-6],
        &[-0.009812, -1.488e-6],
        &[-9.080e-5, -1.371e-8],
        &[-0.03479, -1.700e-6],
        &[0.004171, 2.913e-7],
    ]);
    let e = matrix_rows(&DMatrix::identity(6, 6));
    let z0 = box_zonotope_spec(
        &[40.0, 0.0, -0.1, -PI, 0.0, 260.0],
        &[60.0, 10.0, 0.1, PI, 800.0, 390.0],
    );
    let u = box_zonotope_spec(&[-0.262, 0.0], &[0.524, 1.0e4]);
    ProblemFile {
        version: SCHEMA_VERSION.into(),
        system: SystemSpec {
            a,
            b,
            e,
            k: dec_vec(&[0.0; 6]),
        },
        u,
        w: symmetric_box(&[0.3025, 0.4025, 0.01213, 0.006750, 1.373, 1.331]),
        target: z0,
        horizon: 50,
        options: OptionsSpec {
            max_order: Dec(6.0),
            ..Default::default()
        },
    }
}

/// 10D system: a double integrator in 3D space plus a 4D uncontrollable
/// subspace that feeds back into the controllable part. Continuous-time
/// dynamics discretized exactly (zero-order hold, Δt = 0.5 s); the
/// disturbance matrix is discretized the same way as B.
fn integrator10d() -> ProblemFile {
    let n = 10;
    let mut ac = DMatrix::<f64>::zeros(n, n);
    // xdot1 = x2 + x7 + x10 + w1 ; xdot2 = u1 + w2
    ac[(0, 1)] = 1.0;
    ac[(0, 6)] = 1.0;
    ac[(0, 9)] = 1.0;
    // xdot3 = x4 - x8 + w3 ; xdot4 = u2 + w4
    ac[(2, 3)] = 1.0;
    ac[(2, 7)] = -1.0;
    // xdot5 = x6 + x9 + w5 ; xdot6 = u3 + w6
    ac[(4, 5)] = 1.0;
    ac[(4, 8)] = 1.0;
    // xdot7 = -0.01 x7 + x8 + w7 ; xdot8 = -0.01 x7 - x8 + w8
    ac[(6, 6)] = -0.01;
    ac[(6, 7)] = 1.0;
    ac[(7, 6)] = -0.01;
    ac[(7, 7)] = -1.0;
    // xdot9 = -1e-4 x7 + 2 x10 + w9 ; xdot10 = -2 x9 - 1e-4 x10 + w10
    ac[(8, 6)] = -1e-4;
    ac[(8, 9)] = 2.0;
    ac[(9, 8)] = -2.0;
    ac[(9, 9)] = -1e-4;

    let mut bc = DMatrix::<f64>::zeros(n, 3);
    bc[(1, 0)] = 1.0;
    bc[(3, 1)] = 1.0;
    bc[(5, 2)] = 1.0;

    let dt = 0.5;
    // exp([[A, I], [0, 0]]·dt) carries exp(A·dt) top-left and
    // S = ∫₀^dt exp(Aτ)dτ top-right; then B_d = S·B_c and E_d = S·E_c = S.
    let mut aug = DMatrix::<f64>::zeros(2 * n, 2 * n);
    aug.view_mut((0, 0), (n, n)).copy_from(&ac);
    aug.view_mut((0, n), (n, n))
        .copy_from(&DMatrix::identity(n, n));
    let exp = (aug * dt).exp();
    let ad = exp.view((0, 0), (n, n)).into_owned();
    let s = exp.view((0, n), (n, n)).into_owned();
    let bd = &s * &bc;
    let ed = s;

    let mut lo = vec![-0.5; n];
    let mut hi = vec![0.5; n];
    for i in [0, 2, 4] {
        lo[i] = 9.5;
        hi[i] = 10.5;
    }
    let z0 = box_zonotope_spec(&lo, &hi);
    let u = box_zonotope_spec(&[-0.5; 3], &[0.5; 3]);
    let w = symmetric_box(&[0.12, 0.2, 0.12, 0.2, 0.12, 0.2, 0.1, 0.1, 0.1, 0.1]);

    ProblemFile {
        version: SCHEMA_VERSION.into(),
        system: SystemSpec {
            a: matrix_rows(&ad),
            b: matrix_rows(&bd),
            e: matrix_rows(&ed),
            k: dec_vec(&vec![0.0; n]),
        },
        u,
        w,
        target: z0,
        horizon: 50,
        options: OptionsSpec {
            // W is a 10-generator box while its vertex count is 2^10: the
            // containment encoding is the tractable route here.
            method: "sadraddini".into(),
            max_order: Dec(6.0),
            ..Default::default()
        },
    }
}

/// 1D demo: A=1, B=1, E=1, K=0, U=[-1,1], W=[-0.1,0.1], Z0=[-1,1].
fn demo1d() -> ProblemFile {
    ProblemFile {
        version: SCHEMA_VERSION.into(),
        system: SystemSpec {
            a: rows(&[&[1.0]]),
            b: rows(&[&[1.0]]),
            e: rows(&[&[1.0]]),
            k: dec_vec(&[0.0]),
        },
        u: box_zonotope_spec(&[-1.0], &[1.0]),
        w: symmetric_box(&[0.1]),
        target: box_zonotope_spec(&[-1.0], &[1.0]),
        horizon: 3,
        options: OptionsSpec::default(),
    }
}

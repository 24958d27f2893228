//! Exact zonotope volume by determinant enumeration.
//!
//! `vol(Z) = 2ⁿ · Σ_{|S|=n} |det G_S|` over all n-column subsets of the
//! generator matrix. Combinatorial in the order, hence the cap; callers fall
//! back to ratio-free reporting when the cap trips.

use nalgebra::DMatrix;

use super::Zonotope;
use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exact Euclidean volume of `z`, enumerating `C(N, n)` column subsets.
///
/// Returns 0 for degenerate zonotopes with fewer generators than dimensions,
/// and `VolumeTooLarge` when the subset count exceeds `cap`.
pub fn volume_exact(z: &Zonotope, cap: u64) -> Result<f64> {
    let n = z.dim();
    let ncols = z.num_generators();
    if n == 0 {
        return Err(Error::InvalidArgument("zero-dimensional zonotope".into()));
    }
    if ncols < n {
        return Ok(0.0);
    }
    let combos = binomial(ncols, n);
    if combos > cap {
        return Err(Error::VolumeTooLarge {
            n_gens: ncols,
            dim: n,
            combinations: combos,
            cap,
        });
    }

    let g = z.generators();
    let mut sub = DMatrix::zeros(n, n);
    let mut total = 0.0_f64;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        for (col, &j) in idx.iter().enumerate() {
            sub.set_column(col, &g.column(j));
        }
        total += sub.clone().determinant().abs();

        // next lexicographic n-subset of {0..ncols}
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(total * 2f64.powi(n as i32));
            }
            i -= 1;
            if idx[i] != i + ncols - n {
                break;
            }
        }
        idx[i] += 1;
        for k in i + 1..n {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_square_has_volume_four() {
        let z = Zonotope::new(DMatrix::identity(2, 2), DVector::zeros(2)).unwrap();
        assert_eq!(volume_exact(&z, 1000).unwrap(), 4.0);
    }

    #[test]
    fn unit_cube_has_volume_eight() {
        let z = Zonotope::new(DMatrix::identity(3, 3), DVector::zeros(3)).unwrap();
        assert_eq!(volume_exact(&z, 1000).unwrap(), 8.0);
    }

    #[test]
    fn three_generator_hexagon() {
        // dets: |[e1 e2]| + |[e1 (1,1)]| + |[e2 (1,1)]| = 1 + 1 + 1, times 4.
        let z = Zonotope::new(dmatrix![1.0, 0.0, 1.0; 0.0, 1.0, 1.0], DVector::zeros(2)).unwrap();
        assert_eq!(volume_exact(&z, 1000).unwrap(), 12.0);
    }

    #[test]
    fn degenerate_flat_zonotope() {
        let z = Zonotope::new(dmatrix![1.0; 0.0], DVector::zeros(2)).unwrap();
        assert_eq!(volume_exact(&z, 1000).unwrap(), 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let z = Zonotope::new(DMatrix::repeat(4, 40, 0.5), DVector::zeros(4)).unwrap();
        match volume_exact(&z, 10) {
            Err(Error::VolumeTooLarge { combinations, .. }) => {
                assert_eq!(combinations, binomial(40, 4));
            }
            other => panic!("expected VolumeTooLarge, got {other:?}"),
        }
    }

    /// Exact membership for 2D/3D zonotopes from facet normals (generalized
    /// cross products of (n-1)-subsets of generators). Independent of both
    /// the LP route and the determinant formula.
    fn member_by_facets(z: &Zonotope, x: &nalgebra::DVector<f64>) -> bool {
        let g = z.generators();
        let d = x - z.center();
        let mut normals: Vec<DVector<f64>> = Vec::new();
        match z.dim() {
            2 => {
                for j in 0..g.ncols() {
                    normals.push(DVector::from_vec(vec![-g[(1, j)], g[(0, j)]]));
                }
            }
            3 => {
                for a in 0..g.ncols() {
                    for b in a + 1..g.ncols() {
                        let u = g.column(a);
                        let v = g.column(b);
                        normals.push(DVector::from_vec(vec![
                            u[1] * v[2] - u[2] * v[1],
                            u[2] * v[0] - u[0] * v[2],
                            u[0] * v[1] - u[1] * v[0],
                        ]));
                    }
                }
            }
            _ => panic!("facet oracle only for 2D/3D"),
        }
        for eta in normals {
            if eta.norm() < 1e-12 {
                continue;
            }
            let width: f64 = (0..g.ncols()).map(|j| eta.dot(&g.column(j).into_owned()).abs()).sum();
            if eta.dot(&d).abs() > width + 1e-12 {
                return false;
            }
        }
        true
    }

    #[test]
    fn volume_matches_monte_carlo() {
        // 1e6 samples in the bounding box; membership by the facet oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (dim, gens) in [(2usize, 4usize), (3, 4)] {
            let g = DMatrix::from_fn(dim, gens, |_, _| rng.gen_range(-1.0..1.0));
            let z = Zonotope::new(g, DVector::zeros(dim)).unwrap();
            let exact = volume_exact(&z, 100_000).unwrap();
            let bb = z.bounding_box();
            let bb_vol: f64 = (bb.upper() - bb.lower()).iter().product();
            let trials = 1_000_000usize;
            let mut hits = 0usize;
            for _ in 0..trials {
                let x = bb.sample_uniform(&mut rng);
                if member_by_facets(&z, &x) {
                    hits += 1;
                }
            }
            let mc = bb_vol * hits as f64 / trials as f64;
            let rel = (mc - exact).abs() / exact;
            assert!(rel < 0.02, "dim {dim}: MC {mc} vs exact {exact} (rel {rel})");
        }
    }
}

//! Principal-component projection by seeded subspace iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const ITERATIONS: usize = 60;
const OVERSAMPLE: usize = 5;

/// Projects `vectors` onto their top `reduced_dim` principal components.
///
/// Vectors that already have `reduced_dim` components are returned as is.
/// The random start of the iteration is drawn from `seed`, so the output is
/// a pure function of the inputs.
pub fn reduce(vectors: &[Vec<f64>], reduced_dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let dim = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::Invalid("vectors of unequal length".into()));
    }
    if reduced_dim == 0 || (dim > 0 && reduced_dim > dim) {
        return Err(Error::Config(format!(
            "reduced_dim {reduced_dim} must be in 1..={dim}"
        )));
    }
    if vectors.len() < reduced_dim + 1 {
        return Err(Error::Invalid(format!(
            "{} documents with embeddings cannot be projected to {reduced_dim} dimensions; lower reduced_dim",
            vectors.len()
        )));
    }
    if dim == reduced_dim {
        return Ok(vectors.to_vec());
    }

    let n = vectors.len();
    let mut x = DMatrix::from_fn(n, dim, |i, j| vectors[i][j]);
    for j in 0..dim {
        let mean = x.column(j).mean();
        x.column_mut(j).add_scalar_mut(-mean);
    }

    let width = (reduced_dim + OVERSAMPLE).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = DMatrix::from_fn(dim, width, |_, _| StandardNormal.sample(&mut rng));
    q = q.qr().q();
    for _ in 0..ITERATIONS {
        let z = x.transpose() * (&x * &q);
        q = z.qr().q();
    }

    // Rayleigh-Ritz on the converged subspace.
    let xq = &x * &q;
    let small = xq.transpose() * &xq;
    let eig = SymmetricEigen::new(small);
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut components = DMatrix::zeros(dim, reduced_dim);
    for (k, &col) in order.iter().take(reduced_dim).enumerate() {
        let mut c = &q * eig.eigenvectors.column(col);
        let pivot = c
            .iter()
            .copied()
            .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            c.neg_mut();
        }
        components.set_column(k, &c);
    }
    let projected = x * components;
    Ok((0..n)
        .map(|i| projected.row(i).iter().copied().collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut which = Vec::new();
        for i in 0..40 {
            let left = i % 2 == 0;
            let center = if left { -3.0 } else { 3.0 };
            let v: Vec<f64> = (0..10)
                .map(|j| {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let c = if j < 3 { center } else { 0.0 };
                    c + 0.3 * noise
                })
                .collect();
            out.push(v);
            which.push(left);
        }
        (out, which)
    }

    #[test]
    fn identity_when_already_small() {
        let v = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 7.0]];
        assert_eq!(reduce(&v, 2, 1).unwrap(), v);
    }

    #[test]
    fn first_component_separates_blobs() {
        let (v, left) = blobs(7);
        let r = reduce(&v, 3, 11).unwrap();
        assert!(r.iter().all(|p| p.len() == 3));
        let a_max = r
            .iter()
            .zip(&left)
            .filter(|(_, &l)| l)
            .map(|(p, _)| p[0])
            .fold(f64::MIN, f64::max);
        let a_min = r
            .iter()
            .zip(&left)
            .filter(|(_, &l)| l)
            .map(|(p, _)| p[0])
            .fold(f64::MAX, f64::min);
        let b_max = r
            .iter()
            .zip(&left)
            .filter(|(_, &l)| !l)
            .map(|(p, _)| p[0])
            .fold(f64::MIN, f64::max);
        let b_min = r
            .iter()
            .zip(&left)
            .filter(|(_, &l)| !l)
            .map(|(p, _)| p[0])
            .fold(f64::MAX, f64::min);
        assert!(
            a_max < b_min || b_max < a_min,
            "blobs overlap on the first component"
        );
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let (v, _) = blobs(3);
        let a = reduce(&v, 4, 99).unwrap();
        let b = reduce(&v, 4, 99).unwrap();
        let bits = |r: &Vec<Vec<f64>>| r.iter().flatten().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn too_few_documents() {
        let v = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        assert!(reduce(&v, 2, 0).is_err());
        assert!(reduce(&v, 4, 0).is_err());
    }

    #[test]
    fn variance_ordering_matches_exact_eigen() {
        let (v, _) = blobs(5);
        let r = reduce(&v, 3, 1).unwrap();
        let var = |k: usize| {
            let m = r.iter().map(|p| p[k]).sum::<f64>() / r.len() as f64;
            r.iter().map(|p| (p[k] - m).powi(2)).sum::<f64>()
        };
        // exact covariance spectrum
        let n = v.len();
        let x = DMatrix::from_fn(n, 10, |i, j| v[i][j]);
        let mut xc = x.clone();
        for j in 0..10 {
            let m = xc.column(j).mean();
            xc.column_mut(j).add_scalar_mut(-m);
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(xc.transpose() * &xc)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for (k, e) in ev.iter().take(3).enumerate() {
            assert!((var(k) - e).abs() / e < 1e-6, "component {k}: {} vs {e}", var(k));
        }
    }
}

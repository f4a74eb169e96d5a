//! The heat semigroup of the simple random walk on an integer interval.

use nalgebra::{DMatrix, SymmetricEigen};

use super::expm::expm_positive;
use crate::error::{invalid, Result};

/// `exp(-t (I - P)) e_0` on `[-w, w]` with killing outside, where `P` is the
/// nearest-neighbour average. Index `w + n` holds site `n`; entries with
/// `|n| <= watch` carry full relative accuracy.
pub fn z_heat_taylor(t: f64, w: usize, watch: usize) -> Result<Vec<f64>> {
    if watch > w {
        return Err(invalid("watched window exceeds the interval"));
    }
    let n = 2 * w + 1;
    let mut e0 = vec![0.0; n];
    e0[w] = 1.0;
    let apply = |v: &[f64]| {
        let mut out = vec![0.0; v.len()];
        for i in 0..v.len() {
            if i > 0 {
                out[i] += 0.5 * v[i - 1];
            }
            if i + 1 < v.len() {
                out[i] += 0.5 * v[i + 1];
            }
        }
        out
    };
    let v = expm_positive(apply, &e0, t, 1.0, w - watch..w + watch + 1, 1e-17)?;
    Ok(v.into_iter().map(|x| x * (-t).exp()).collect())
}

/// The same vector through a dense symmetric eigendecomposition.
pub fn z_heat_eigen(t: f64, w: usize) -> Vec<f64> {
    let n = 2 * w + 1;
    let mut m = DMatrix::identity(n, n);
    for i in 0..n - 1 {
        m[(i, i + 1)] = -0.5;
        m[(i + 1, i)] = -0.5;
    }
    let eig = SymmetricEigen::new(m);
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let v = &eig.eigenvectors;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| v[(w, k)] * v[(i, k)] * (-t * lam[k]).exp())
                .sum::<f64>()
        })
        .collect()
}

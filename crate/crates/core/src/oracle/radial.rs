//! Radial quotient of a ball around its center.
//!
//! On the ball of radius `R` the adjacency operator preserves functions that
//! depend only on the distance to the center. In the basis of normalized
//! sphere indicators it acts as a tridiagonal matrix with off-diagonal
//! entries `sqrt(q+1)` between spheres 0 and 1 and `sqrt(q)` further out.

use nalgebra::{DMatrix, SymmetricEigen};

use super::expm::expm_positive;
use crate::error::{invalid, Result};
use crate::tree::{ln_stratum_count, TreeParams};

/// Off-diagonal entries of the radial adjacency, `R` of them.
pub fn radial_offdiag(p: &TreeParams, radius: u32) -> Vec<f64> {
    (0..radius)
        .map(|r| if r == 0 { (p.qf() + 1.0).sqrt() } else { p.qf().sqrt() })
        .collect()
}

pub fn radial_adjacency(p: &TreeParams, radius: u32) -> DMatrix<f64> {
    let n = radius as usize + 1;
    let mut m = DMatrix::zeros(n, n);
    for (i, &a) in radial_offdiag(p, radius).iter().enumerate() {
        m[(i, i + 1)] = a;
        m[(i + 1, i)] = a;
    }
    m
}

/// `ln |S_d|` for the sphere of radius `d`.
pub fn ln_sphere_size(d: u32, p: &TreeParams) -> f64 {
    if d == 0 {
        0.0
    } else {
        (p.qf() + 1.0).ln() + f64::from(d - 1) * p.ln_q()
    }
}

fn radial_apply(off: &[f64], scale: f64, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 0..n - 1 {
        out[i] += off[i] * scale * v[i + 1];
        out[i + 1] += off[i] * scale * v[i];
    }
    out
}

fn radial_exp(p: &TreeParams, radius: u32, t: f64, scale: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time must be nonnegative, got {t}")));
    }
    let off = radial_offdiag(p, radius);
    let norm = 2.0 * (p.qf() + 1.0).sqrt() * scale;
    let mut e0 = vec![0.0; radius as usize + 1];
    e0[0] = 1.0;
    let n = e0.len();
    let v = expm_positive(|v| radial_apply(&off, scale, v), &e0, t, norm, 0..n, 1e-17)?;
    Ok(v
        .iter()
        .enumerate()
        .map(|(d, x)| x * (-t - 0.5 * ln_sphere_size(d as u32, p)).exp())
        .collect())
}

/// Orthonormal heat entries `J_t(d)` between the center and any vertex at
/// distance `d`, for the ball with Dirichlet truncation.
pub fn ball_heat_profile(p: &TreeParams, radius: u32, t: f64) -> Result<Vec<f64>> {
    radial_exp(p, radius, t, 0.5 / p.qf().sqrt())
}

/// Entries of `exp(-t Delta)` between the center and distance `d`.
pub fn ball_combinatorial_profile(p: &TreeParams, radius: u32, t: f64) -> Result<Vec<f64>> {
    radial_exp(p, radius, t, 1.0 / (p.qf() + 1.0))
}

/// Same as [`ball_heat_profile`] through a symmetric eigendecomposition.
pub fn ball_heat_profile_eigen(p: &TreeParams, radius: u32, t: f64) -> Vec<f64> {
    let n = radius as usize + 1;
    let m = DMatrix::identity(n, n) - radial_adjacency(p, radius) * (0.5 / p.qf().sqrt());
    let eig = SymmetricEigen::new(m);
    let lam: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let v = &eig.eigenvectors;
    (0..n)
        .map(|d| {
            let s: f64 = (0..n)
                .map(|k| v[(0, k)] * v[(d, k)] * (-t * lam[k]).exp())
                .sum();
            s * (-0.5 * ln_sphere_size(d as u32, p)).exp()
        })
        .collect()
}

/// Heat mass `sum_y H_t(x, y) mu(y)` of the Dirichlet ball kernel on each
/// sphere around the center `x`.
pub fn ball_sphere_mass(p: &TreeParams, radius: u32, t: f64) -> Result<Vec<f64>> {
    let prof = ball_heat_profile(p, radius, t)?;
    Ok(prof
        .iter()
        .enumerate()
        .map(|(d, j)| {
            let d = d as u32;
            let w: f64 = (0..=d)
                .map(|i| {
                    let off = 2.0 * f64::from(i) - f64::from(d);
                    (ln_stratum_count(d, i, p) + 0.5 * off * p.ln_q()).exp()
                })
                .sum();
            j * w
        })
        .collect())
}

//! Exact spectrum of the adjacency operator on a ball by block
//! decomposition into weighted paths.
//!
//! Besides the radial quotient, every vertex at distance `r >= 1` with its
//! `q` children contributes `q - 1` copies of a path on the distances
//! `r + 1..=R`, and the center contributes `q` copies of a path on
//! `1..=R`. All path edges carry weight `sqrt(q)`.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::radial::radial_adjacency;
use crate::tree::TreeParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigen {
    pub value: f64,
    pub multiplicity: f64,
}

fn path_eigenvalues(n: usize, w: f64) -> impl Iterator<Item = f64> {
    (1..=n).map(move |j| 2.0 * w * (std::f64::consts::PI * j as f64 / (n + 1) as f64).cos())
}

/// Adjacency eigenvalues of the ball of radius `R`, ascending, with
/// multiplicities.
pub fn ball_adjacency_spectrum(p: &TreeParams, radius: u32) -> Vec<Eigen> {
    let q = p.qf();
    let w = q.sqrt();
    let mut out: Vec<Eigen> = SymmetricEigen::new(radial_adjacency(p, radius))
        .eigenvalues
        .iter()
        .map(|&value| Eigen {
            value,
            multiplicity: 1.0,
        })
        .collect();
    let r_max = radius as usize;
    out.extend(path_eigenvalues(r_max, w).map(|value| Eigen {
        value,
        multiplicity: q,
    }));
    for r in 1..r_max {
        let copies = (q + 1.0) * q.powi(r as i32 - 1) * (q - 1.0);
        out.extend(path_eigenvalues(r_max - r, w).map(|value| Eigen {
            value,
            multiplicity: copies,
        }));
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    out
}

/// Spectrum of `I - A / (2 sqrt q)`, the flow Laplacian in orthonormal form.
pub fn flow_spectrum(p: &TreeParams, radius: u32) -> Vec<Eigen> {
    let c = 0.5 / p.qf().sqrt();
    map_spectrum(p, radius, c)
}

/// Spectrum of `I - A / (q + 1)`.
pub fn combinatorial_spectrum(p: &TreeParams, radius: u32) -> Vec<Eigen> {
    map_spectrum(p, radius, 1.0 / (p.qf() + 1.0))
}

fn map_spectrum(p: &TreeParams, radius: u32, c: f64) -> Vec<Eigen> {
    let mut v: Vec<Eigen> = ball_adjacency_spectrum(p, radius)
        .into_iter()
        .map(|e| Eigen {
            value: 1.0 - c * e.value,
            multiplicity: e.multiplicity,
        })
        .collect();
    v.reverse();
    v
}

/// Extreme eigenvalues and trend data reported by the spectrum command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub q: u32,
    pub radius: u32,
    pub dimension: f64,
    pub flow_min: f64,
    pub flow_max: f64,
    pub combinatorial_min: f64,
    pub bottom: f64,
}

pub fn spectrum_summary(p: &TreeParams, radius: u32) -> SpectrumSummary {
    let flow = flow_spectrum(p, radius);
    let comb = combinatorial_spectrum(p, radius);
    SpectrumSummary {
        q: p.q(),
        radius,
        dimension: flow.iter().map(|e| e.multiplicity).sum(),
        flow_min: flow[0].value,
        flow_max: flow[flow.len() - 1].value,
        combinatorial_min: comb[0].value,
        bottom: p.b(),
    }
}

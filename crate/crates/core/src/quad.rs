//! Composite Gauss-Legendre quadrature with panel doubling.
//!
//! The error estimate of a result on `2m` panels is `|I_2m - I_m|`, taken
//! componentwise for vector integrands and reduced by the maximum.

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Default number of nodes per panel.
pub const DEFAULT_DEGREE: usize = 12;
const MAX_PANELS: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct Rule {
    /// `(node, weight)` on `[-1, 1]`.
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(degree: usize) -> Result<Self> {
        let gl = GaussLegendre::new(degree)
            .map_err(|_| invalid(format!("Gauss-Legendre degree must be >= 2, got {degree}")))?;
        Ok(Self {
            pairs: gl.as_node_weight_pairs().to_vec(),
        })
    }

    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights of the composite rule with `panels` equal panels.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.pairs.len());
        for i in 0..panels {
            let lo = a + h * i as f64;
            for &(x, w) in &self.pairs {
                out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
            }
        }
        out
    }
}

/// Integral with its a posteriori error estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Integral<T> {
    pub value: T,
    pub error: f64,
    pub panels: usize,
}

fn apply<F>(rule: &Rule, a: f64, b: f64, panels: usize, f: &F, len: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let pts = rule.composite(a, b, panels);
    let vals: Vec<Vec<f64>> = pts.par_iter().map(|&(x, _)| f(x)).collect::<Result<_>>()?;
    let mut acc = vec![0.0; len];
    for ((_, w), v) in pts.iter().zip(&vals) {
        if v.len() != len {
            return Err(Error::Numerical("integrand changed length".into()));
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a += w * x;
        }
    }
    Ok(acc)
}

/// `int_a^b f(t) dt` for a vector-valued `f`, doubling the panel count until
/// successive results differ by at most `tol` in every component.
pub fn integrate_vec<F>(rule: &Rule, a: f64, b: f64, tol: f64, f: F) -> Result<Integral<Vec<f64>>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid(format!("bad integration interval [{a}, {b}]")));
    }
    let len = f(0.5 * (a + b))?.len();
    let mut panels = 1;
    let mut coarse = apply(rule, a, b, panels, &f, len)?;
    loop {
        panels *= 2;
        let fine = apply(rule, a, b, panels, &f, len)?;
        let error = coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| (c - f).abs())
            .fold(0.0, f64::max);
        if error <= tol {
            return Ok(Integral {
                value: fine,
                error,
                panels,
            });
        }
        if panels >= MAX_PANELS || !error.is_finite() {
            return Err(Error::Quadrature {
                a,
                b,
                estimate: error,
                tol,
            });
        }
        coarse = fine;
    }
}

/// Scalar version of [`integrate_vec`].
pub fn integrate<F>(rule: &Rule, a: f64, b: f64, tol: f64, f: F) -> Result<Integral<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let r = integrate_vec(rule, a, b, tol, |t| Ok(vec![f(t)?]))?;
    Ok(Integral {
        value: r.value[0],
        error: r.error,
        panels: r.panels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let rule = Rule::new(DEFAULT_DEGREE).unwrap();
        let r = integrate(&rule, 0.0, std::f64::consts::PI, 1e-13, |x| Ok(x.sin())).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.error <= 1e-13);
        let r = integrate(&rule, 1.0, 2.0, 1e-14, |x| Ok(x.powf(-2.0))).unwrap();
        assert!((r.value - 0.5).abs() < 1e-14);
    }

    #[test]
    fn vector_integrand_is_componentwise() {
        let rule = Rule::new(6).unwrap();
        let r = integrate_vec(&rule, 0.0, 1.0, 1e-14, |x| Ok(vec![1.0, x, x * x])).unwrap();
        for (v, want) in r.value.iter().zip([1.0, 0.5, 1.0 / 3.0]) {
            assert!((v - want).abs() < 1e-15);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let rule = Rule::new(2).unwrap();
        let r = integrate(&rule, 0.0, 1.0, 1e-300, |x| Ok((50.0 * x).sin() / x.sqrt()));
        assert!(matches!(r, Err(Error::Quadrature { .. })));
        assert!(Rule::new(1).is_err());
        assert!(integrate(&rule, 1.0, 1.0, 1e-3, |_| Ok(0.0)).is_err());
    }
}

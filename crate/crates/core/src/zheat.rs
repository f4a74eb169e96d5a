//! Heat kernel of the combinatorial Laplacian on the integers.
//!
//! `hz(t, n)` is the probability that a continuous-time simple random walk on
//! `Z` with unit jump rate sits at `n` at time `t`. Conditioning on the number
//! of jumps `m` gives the reference series
//!
//! ```text
//! hz(t, n) = sum_{m >= |n|, m = n mod 2} Poisson(m; t) * C(m, (m+n)/2) 2^{-m}
//! ```
//!
//! whose terms are positive. The same values equal `e^{-t} I_n(t)`, which the
//! fast path [`HzTable`] obtains by backward recurrence.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{ln_binomial_half, ln_factorial, ln_poisson_pmf, log_sum_exp, CompensatedSum};

/// Default absolute tolerance for heat-kernel evaluations.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative truncation target of the reference series.
const SERIES_REL: f64 = 1e-17;

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Log of the reference series, truncated once the Poisson tail falls below
/// both `abs_tol` and a relative `1e-17` of the partial sum.
fn series_ln(t: f64, n: u64, abs_tol: f64) -> f64 {
    let ln_tol = if abs_tol > 0.0 {
        abs_tol.ln()
    } else {
        f64::INFINITY
    };
    let mut logs = Vec::new();
    let mut running = f64::NEG_INFINITY;
    let mut m = n;
    loop {
        let a = (m + n) / 2;
        let lt = ln_poisson_pmf(m, t) + ln_binomial_half(a, m);
        logs.push(lt);
        running = log_add(running, lt);
        let next = (m + 2) as f64;
        if next > t {
            // sum_{m' > m} Poisson(m'; t) <= Poisson(m+1; t) / (1 - t/(m+2))
            let ln_tail = ln_poisson_pmf(m + 1, t) - (1.0 - t / next).ln();
            if ln_tail <= running + SERIES_REL.ln() && ln_tail <= ln_tol - std::f64::consts::LN_2 {
                break;
            }
        }
        m += 2;
    }
    log_sum_exp(&logs)
}

/// `hz(t, n)` from the reference series with absolute error at most `tol`.
pub fn hz(t: f64, n: i64, tol: f64) -> Result<f64> {
    check_time(t)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    Ok(series_ln(t, n.unsigned_abs(), tol).exp())
}

/// `ln hz(t, n)`, accurate in relative terms even where `hz` underflows.
pub fn ln_hz(t: f64, n: i64) -> Result<f64> {
    check_time(t)?;
    Ok(series_ln(t, n.unsigned_abs(), 0.0))
}

/// `hz(t, j-1) - hz(t, j+1) - (2j/t) hz(t, j)`, which vanishes identically.
pub fn hz_recurrence_residual(t: f64, j: i64, tol: f64) -> Result<f64> {
    if j < 1 {
        return Err(invalid(format!(
            "recurrence residual needs j >= 1, got {j}"
        )));
    }
    let lo = hz(t, j - 1, tol)?;
    let mid = hz(t, j, tol)?;
    let hi = hz(t, j + 1, tol)?;
    Ok(lo - hi - 2.0 * j as f64 / t * mid)
}

/// `hz(t, 0..=n_max)` in one sweep of the backward recurrence
/// `f(n-1) = (2n/t) f(n) + f(n+1)`, normalised by `sum_{n in Z} hz(t, n) = 1`.
#[derive(Debug, Clone)]
pub struct HzTable {
    t: f64,
    values: Vec<f64>,
}

impl HzTable {
    pub fn new(t: f64, n_max: usize) -> Result<Self> {
        check_time(t)?;
        let start = n_max + 40 + (12.0 * t.sqrt()).ceil() as usize;
        let mut values = vec![0.0; n_max + 1];
        let (mut f_hi, mut f) = (0.0f64, 1e-280f64);
        let mut norm = 0.0f64;
        const BIG: f64 = 1e250;
        for idx in (0..=start).rev() {
            if idx <= n_max {
                values[idx] = f;
            }
            norm += if idx == 0 { f } else { 2.0 * f };
            if idx == 0 {
                break;
            }
            let f_lo = 2.0 * idx as f64 / t * f + f_hi;
            f_hi = f;
            f = f_lo;
            if f.abs() > BIG {
                let s = 1.0 / BIG;
                f *= s;
                f_hi *= s;
                norm *= s;
                for v in values.iter_mut().skip(idx.saturating_sub(1)) {
                    *v *= s;
                }
            }
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self { t, values })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `hz(t, n)`; zero beyond the table, where values are below `1e-280`
    /// relative to the bulk.
    pub fn get(&self, n: i64) -> f64 {
        self.values
            .get(n.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `phi(x) = -x + sqrt(1 + x^2) + ln(x / (1 + sqrt(1 + x^2)))`, written as
/// `1/(x + sqrt(1 + x^2)) - asinh(1/x)` so that neither end cancels.
pub fn phi(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("phi is defined for x > 0, got {x}")));
    }
    Ok(1.0 / (x + x.hypot(1.0)) - (1.0 / x).asinh())
}

/// Result of a weighted sum or supremum over `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZWeighted {
    pub value: f64,
    /// Largest index actually evaluated.
    pub n_max: usize,
    /// Certified bound on everything beyond `n_max`.
    pub tail_bound: f64,
}

enum ZReduce {
    Sup,
    Sum,
}

fn weighted_z(t: f64, eps: f64, tol: f64, reduce: ZReduce) -> Result<ZWeighted> {
    check_time(t)?;
    if !(eps >= 0.0) {
        return Err(invalid(format!("epsilon must be nonnegative, got {eps}")));
    }
    let rate = eps / t.sqrt();
    let growth = rate.exp();
    let mut size = ((growth * t).ceil() as usize).max(16) + (12.0 * t.sqrt()).ceil() as usize + 64;
    loop {
        let table = HzTable::new(t, size)?;
        let term = |n: usize| {
            let h = table.get(n as i64);
            if h > 0.0 {
                (rate * n as f64 + h.ln()).exp()
            } else {
                0.0
            }
        };
        let mut sum = CompensatedSum::new();
        let mut sup = 0.0f64;
        for n in 0..size {
            let tn = term(n);
            sup = sup.max(tn);
            sum.add(if n == 0 { tn } else { 2.0 * tn });
            // ratio bound term(n+1)/term(n) < e^{rate} t / (2(n+1))
            let rho = growth * t / (2.0 * (n + 1) as f64);
            if rho < 1.0 {
                let tail = 2.0 * tn * rho / (1.0 - rho);
                let done = match reduce {
                    // later terms only shrink, so the supremum is already attained
                    ZReduce::Sup => true,
                    ZReduce::Sum => tail <= tol,
                };
                if done {
                    return Ok(match reduce {
                        ZReduce::Sup => ZWeighted {
                            value: sup,
                            n_max: n,
                            tail_bound: 0.0,
                        },
                        ZReduce::Sum => ZWeighted {
                            value: sum.value(),
                            n_max: n,
                            tail_bound: tail,
                        },
                    });
                }
            }
        }
        size *= 2;
    }
}

fn require_large_time(t: f64) -> Result<()> {
    if t < 1.0 {
        return Err(invalid(format!(
            "weighted bounds are only claimed for t >= 1, got {t}"
        )));
    }
    Ok(())
}

/// `sup_n e^{eps |n| / sqrt t} hz(t, n)` for `t >= 1`.
pub fn weighted_sup_bound(t: f64, eps: f64, tol: f64) -> Result<ZWeighted> {
    require_large_time(t)?;
    weighted_z(t, eps, tol, ZReduce::Sup)
}

/// `sum_n e^{eps |n| / sqrt t} hz(t, n)` for `t >= 1`.
pub fn weighted_l1_bound(t: f64, eps: f64, tol: f64) -> Result<ZWeighted> {
    require_large_time(t)?;
    weighted_z(t, eps, tol, ZReduce::Sum)
}

/// [`weighted_sup_bound`] without the `t >= 1` restriction, for probing the
/// small-time regime where the bound fails.
pub fn weighted_sup_any_time(t: f64, eps: f64, tol: f64) -> Result<ZWeighted> {
    weighted_z(t, eps, tol, ZReduce::Sup)
}

pub fn weighted_l1_any_time(t: f64, eps: f64, tol: f64) -> Result<ZWeighted> {
    weighted_z(t, eps, tol, ZReduce::Sum)
}

/// `hz(t, n)` divided by `e^{|n| phi(t/|n|)} / sqrt(|n| + t)` (or by
/// `(1 + t)^{-1/2}` at `n = 0`).
pub fn grig_comparability(t: f64, n: i64) -> Result<f64> {
    let lh = ln_hz(t, n)?;
    let ln_cmp = if n == 0 {
        -0.5 * (1.0 + t).ln()
    } else {
        let a = n.unsigned_abs() as f64;
        a * phi(t / a)? - 0.5 * (a + t).ln()
    };
    Ok((lh - ln_cmp).exp())
}

/// Smallest and largest [`grig_comparability`] ratio over a grid.
pub fn grig_bracket(ts: &[f64], n_max: i64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &t in ts {
        for n in 0..=n_max {
            let r = grig_comparability(t, n)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok((lo, hi))
}

/// `hz(t, n) / t^{|n|}` divided by its small-time limit `2^{-|n|} / |n|!`.
pub fn small_time_ratio(t: f64, n: i64) -> Result<f64> {
    let a = n.unsigned_abs();
    let lh = ln_hz(t, n)?;
    let af = a as f64;
    Ok((lh - af * t.ln() + af * std::f64::consts::LN_2 + ln_factorial(a)).exp())
}

/// `min_{x >= x0} -x phi(x)` over the grid points at or above `x0`.
pub fn phi_decay_constant(grid: &[f64], x0: f64) -> Result<f64> {
    let mut c = f64::INFINITY;
    for &x in grid.iter().filter(|&&x| x >= x0) {
        c = c.min(-x * phi(x)?);
    }
    Ok(c)
}

/// Range of `-phi(x) / ln(1/x)` over grid points in `(0, kappa]`.
pub fn phi_log_ratio_bracket(grid: &[f64], kappa: f64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in grid.iter().filter(|&&x| x <= kappa && x < 1.0) {
        let r = -phi(x)? / (1.0 / x).ln();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((lo, hi))
}

/// `n` points spaced evenly in `log x` over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

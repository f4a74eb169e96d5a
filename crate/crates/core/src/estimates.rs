//! Weighted `L^1` sums of the heat kernel and its gradients, evaluated as
//! certified series over sphere strata.
//!
//! For `x` in stratum `(k, j)` around `y`, `F(x, y) mu(x)` equals
//! `q^{j-k}` times the reduced profile of `F`, so a sum over the whole tree
//! collapses to
//!
//! ```text
//! sum_k e^{eps k / sqrt t} sum_j w(k, j) |r(kind, k, rel(k, j))|
//! ```
//!
//! with `w = #S_k^{(j)} q^{j-k}` from [`crate::tree::reduced_stratum_weight`].

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::{least_squares, CompensatedSum};
use crate::tree::{RelPos, TreeParams};
use crate::treeheat::{padding, JTable, KernelKind};
use crate::zheat::HzTable;

/// Which vertices `x` enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Restriction {
    None,
    /// Only the horocycle `l(x) = l(y) + offset`.
    Horocycle(i64),
}

impl Restriction {
    pub fn name(&self) -> String {
        match self {
            Restriction::None => "none".into(),
            Restriction::Horocycle(m) => format!("horocycle({m})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedSumSpec {
    pub t: f64,
    pub eps: f64,
    pub kind: KernelKind,
    pub restriction: Restriction,
}

impl WeightedSumSpec {
    /// The estimates are only claimed for `t >= 1`.
    pub fn new(t: f64, eps: f64, kind: KernelKind, restriction: Restriction) -> Result<Self> {
        if !(t >= 1.0 && t.is_finite()) {
            return Err(invalid(format!("weighted sums need t >= 1, got {t}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(invalid(format!("epsilon must be nonnegative, got {eps}")));
        }
        Ok(Self {
            t,
            eps,
            kind,
            restriction,
        })
    }
}

/// A certified sum: `value` plus everything beyond radius `k_max`, which is at
/// most `tail_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedSum {
    pub value: f64,
    pub tail_bound: f64,
    pub k_max: u32,
}

/// Reduced profiles of one kernel at one time, per radius and stratum class,
/// together with the certified radius beyond which everything is below `tol`.
#[derive(Debug, Clone)]
pub struct StratumProfile {
    pub t: f64,
    pub weight: DistanceWeight,
    pub kind: KernelKind,
    p: TreeParams,
    /// `e^{eps k / sqrt t}`-weighted reduced values, indexed `[k][class]` with
    /// classes `Equal/Ancestor, Descendant, Incomparable`.
    rows: Vec<[f64; 3]>,
    pub tail_bound: f64,
}

fn class_index(rel: RelPos) -> usize {
    match rel {
        RelPos::Equal | RelPos::Ancestor => 0,
        RelPos::Descendant => 1,
        RelPos::Incomparable => 2,
    }
}

fn kind_factor(kind: KernelKind) -> f64 {
    match kind {
        KernelKind::H => 1.0,
        KernelKind::GradX | KernelKind::GradY => 2.0,
        KernelKind::GradXY => 4.0,
    }
}

/// Weight of a whole sphere: `2 + (k-1)(q-1)/q` for `k >= 1`.
fn sphere_weight(k: u32, q: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        2.0 + f64::from(k - 1) * (q - 1.0) / q
    }
}

/// `sum_i q^{-i} (m + 2i)`.
fn series_s(m: u32, q: f64) -> f64 {
    let r = 1.0 / q;
    f64::from(m) / (1.0 - r) + 2.0 * r / (1.0 - r).powi(2)
}

/// Weight `w(d)` attached to a vertex at distance `d`; `w(k+1)/w(k)` is
/// nonincreasing in `k` for both variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DistanceWeight {
    /// `e^{rate d}`.
    Exp { rate: f64 },
    /// `(1 + c d)^a`.
    Poly { c: f64, a: f64 },
}

impl DistanceWeight {
    /// `e^{eps d / sqrt t}`.
    pub fn heat(eps: f64, t: f64) -> Self {
        DistanceWeight::Exp {
            rate: eps / t.sqrt(),
        }
    }

    pub fn at(&self, k: u32) -> f64 {
        let kf = f64::from(k);
        match *self {
            DistanceWeight::Exp { rate } => (rate * kf).exp(),
            DistanceWeight::Poly { c, a } => (1.0 + c * kf).powf(a),
        }
    }

    fn ratio(&self, k: u32) -> f64 {
        match *self {
            DistanceWeight::Exp { rate } => rate.exp(),
            DistanceWeight::Poly { .. } => self.at(k + 1) / self.at(k),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DistanceWeight::Exp { rate } => rate >= 0.0 && rate.is_finite(),
            DistanceWeight::Poly { c, a } => c >= 0.0 && a >= 0.0 && c.is_finite() && a.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid distance weight {self:?}")))
        }
    }
}

/// Certified bound on the weighted sphere sums of a kernel at one time.
struct Envelope<'a> {
    t: f64,
    weight: DistanceWeight,
    qf: f64,
    c: f64,
    hz: &'a HzTable,
}

impl Envelope<'_> {
    /// `U(k)`, at least the weighted sum of `|reduced profile|` over `S_k`.
    fn at(&self, k: u32) -> f64 {
        let h = self.hz.get(i64::from(k) - 1);
        self.weight.at(k)
            * sphere_weight(k, self.qf)
            * (2.0 / self.t)
            * h
            * series_s(k + 2, self.qf)
            * self.c
    }

    /// Bound on `U(k'+1)/U(k')` valid for every `k' >= k`. The hz ratio
    /// `hz(m)/hz(m-1)` decreases in `m` (Turan's inequality for `I_n`) and is
    /// below `t/(2m)` by the three-term recurrence.
    fn ratio(&self, k: u32) -> f64 {
        let kf = f64::from(k);
        let (lo, hi) = (self.hz.get(i64::from(k) - 1), self.hz.get(i64::from(k)));
        let mut r_hz = self.t / (2.0 * kf);
        if lo > 1e-250 {
            r_hz = r_hz.min(hi / lo);
        }
        self.weight.ratio(k)
            * (sphere_weight(k + 1, self.qf) / sphere_weight(k, self.qf))
            * r_hz
            * (series_s(k + 3, self.qf) / series_s(k + 2, self.qf))
    }

    /// Bound on everything beyond radius `k`, or infinity if the envelope is
    /// not yet decreasing there.
    fn tail_beyond(&self, k: u32) -> f64 {
        let rho = self.ratio(k + 1);
        if rho < 1.0 {
            self.at(k + 1) / (1.0 - rho)
        } else {
            f64::INFINITY
        }
    }
}

/// Certified bound on `sum over d(x, y) > k` of the weighted `|kernel| mu(x)`.
pub fn tail_beyond(
    t: f64,
    weight: DistanceWeight,
    kind: KernelKind,
    p: &TreeParams,
    k: u32,
) -> Result<f64> {
    check_time(t)?;
    weight.validate()?;
    let hz = HzTable::new(t, k as usize + 8)?;
    let env = Envelope {
        t,
        weight,
        qf: p.qf(),
        c: kind_factor(kind),
        hz: &hz,
    };
    Ok(env.tail_beyond(k))
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// Smallest radius whose certified tail is at most `tol`.
pub fn certified_radius(
    t: f64,
    weight: DistanceWeight,
    kind: KernelKind,
    p: &TreeParams,
    tol: f64,
) -> Result<(u32, f64)> {
    Ok(search_radius(t, weight, kind, p, tol)?.0)
}

fn search_radius(
    t: f64,
    weight: DistanceWeight,
    kind: KernelKind,
    p: &TreeParams,
    tol: f64,
) -> Result<((u32, f64), HzTable)> {
    check_time(t)?;
    weight.validate()?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let slope = match weight {
        DistanceWeight::Exp { rate } => rate * t.sqrt(),
        DistanceWeight::Poly { .. } => 0.0,
    };
    let mut guess =
        (2.0 * weight.ratio(0) * t + 12.0 * t.sqrt() * (1.0 + slope) + 60.0).ceil() as usize;
    let pad = 2 * padding(p) + 8;
    loop {
        let hz = HzTable::new(t, guess + pad)?;
        let env = Envelope {
            t,
            weight,
            qf: p.qf(),
            c: kind_factor(kind),
            hz: &hz,
        };
        if let Some(found) = (2..guess as u32)
            .map(|k| (k, env.tail_beyond(k)))
            .find(|&(_, tail)| tail <= tol)
        {
            return Ok((found, hz));
        }
        guess *= 2;
        if guess > 1 << 26 {
            return Err(Error::Numerical("certified radius not reached".into()));
        }
    }
}

impl StratumProfile {
    /// Profile with weight `e^{eps d / sqrt t}` out to the certified radius,
    /// for any `t > 0`.
    pub fn new(t: f64, eps: f64, kind: KernelKind, p: &TreeParams, tol: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(invalid(format!("epsilon must be nonnegative, got {eps}")));
        }
        check_time(t)?;
        Self::with_weight(t, DistanceWeight::heat(eps, t), kind, p, tol)
    }

    pub fn with_weight(
        t: f64,
        weight: DistanceWeight,
        kind: KernelKind,
        p: &TreeParams,
        tol: f64,
    ) -> Result<Self> {
        let ((k_max, tail), hz) = search_radius(t, weight, kind, p, tol)?;
        let table = JTable::from_hz(&hz, p, k_max as usize + 1);
        let rows = (0..=k_max)
            .map(|k| {
                let w = weight.at(k);
                let first = if k == 0 {
                    RelPos::Equal
                } else {
                    RelPos::Ancestor
                };
                let mut row = [0.0; 3];
                for (idx, rel) in [first, RelPos::Descendant, RelPos::Incomparable]
                    .into_iter()
                    .enumerate()
                {
                    if k >= rel.min_distance() {
                        row[idx] = w * table.reduced(kind, k, rel);
                    }
                }
                row
            })
            .collect();
        Ok(Self {
            t,
            weight,
            kind,
            p: *p,
            rows,
            tail_bound: tail,
        })
    }

    /// Profile from precomputed reduced rows `[k][class]` (already weighted).
    pub fn from_rows(
        t: f64,
        weight: DistanceWeight,
        kind: KernelKind,
        p: &TreeParams,
        rows: Vec<[f64; 3]>,
        tail_bound: f64,
    ) -> Self {
        Self {
            t,
            weight,
            kind,
            p: *p,
            rows,
            tail_bound,
        }
    }

    pub fn k_max(&self) -> u32 {
        (self.rows.len() - 1) as u32
    }

    /// Weighted reduced value of the kernel on stratum `(k, j)`.
    pub fn stratum_value(&self, k: u32, j: u32) -> f64 {
        self.rows
            .get(k as usize)
            .map_or(0.0, |row| row[class_index(RelPos::of_stratum(k, j))])
    }

    fn sum_where(&self, signed: bool, keep: impl Fn(u32, u32) -> bool) -> f64 {
        let qf = self.p.qf();
        let mut s = CompensatedSum::new();
        for (k, row) in self.rows.iter().enumerate() {
            let k = k as u32;
            let f = |v: f64| if signed { v } else { v.abs() };
            if k == 0 {
                if keep(0, 0) {
                    s.add(f(row[0]));
                }
                continue;
            }
            if keep(k, k) {
                s.add(f(row[0]));
            }
            if keep(k, 0) {
                s.add(f(row[1]));
            }
            let inc = (1..k).filter(|&j| keep(k, j)).count() as f64;
            if inc > 0.0 {
                s.add(inc * (qf - 1.0) / qf * f(row[2]));
            }
        }
        s.value()
    }

    /// `sum_x |F(x, y)| e^{eps d / sqrt t} mu(x)` over the whole tree.
    pub fn total(&self) -> WeightedSum {
        self.wrap(self.sum_where(false, |_, _| true))
    }

    /// The same sum without absolute values.
    pub fn signed_total(&self) -> WeightedSum {
        self.wrap(self.sum_where(true, |_, _| true))
    }

    /// Sum over the horocycle `l(x) = l(y) + offset`.
    pub fn horocycle(&self, offset: i64) -> WeightedSum {
        self.wrap(self.sum_where(false, |k, j| 2 * i64::from(j) - i64::from(k) == offset))
    }

    /// Sum over the strata accepted by `keep(k, j)`.
    pub fn partial(&self, keep: impl Fn(u32, u32) -> bool) -> WeightedSum {
        self.wrap(self.sum_where(false, keep))
    }

    /// Largest horocycle sum over all offsets `|m| <= k_max`; offsets beyond
    /// contain only radii past the certified window.
    pub fn horocycle_sup(&self) -> HorocycleSup {
        let k_max = self.k_max() as usize;
        let w_inc = (self.p.qf() - 1.0) / self.p.qf();
        // suffix sums of incomparable rows over radii of equal parity
        let mut inc = vec![0.0f64; k_max + 3];
        for k in (0..=k_max).rev() {
            inc[k] = self.rows[k][2].abs() + inc[k + 2];
        }
        let mut best = (0i64, f64::NEG_INFINITY);
        for a in 0..=k_max {
            let tail = w_inc * inc[a + 2];
            let candidates: &[(i64, usize)] = if a == 0 {
                &[(0, 0)]
            } else {
                &[(a as i64, 0), (-(a as i64), 1)]
            };
            for &(off, class) in candidates {
                let v = self.rows[a][class].abs() + tail;
                if v > best.1 {
                    best = (off, v);
                }
            }
        }
        HorocycleSup {
            value: best.1,
            offset: best.0,
            window: k_max as u32,
            tail_bound: self.tail_bound,
        }
    }

    fn wrap(&self, value: f64) -> WeightedSum {
        WeightedSum {
            value,
            tail_bound: self.tail_bound,
            k_max: self.k_max(),
        }
    }
}

/// Supremum of the horocycle sums over offsets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HorocycleSup {
    pub value: f64,
    /// Offset `m - l(y)` attaining the supremum.
    pub offset: i64,
    /// Offsets scanned: `|m - l(y)| <= window`.
    pub window: u32,
    pub tail_bound: f64,
}

/// The weighted sum described by `spec`.
pub fn weighted_sum(spec: &WeightedSumSpec, p: &TreeParams, tol: f64) -> Result<WeightedSum> {
    let profile = StratumProfile::new(spec.t, spec.eps, spec.kind, p, tol)?;
    Ok(match spec.restriction {
        Restriction::None => profile.total(),
        Restriction::Horocycle(m) => profile.horocycle(m),
    })
}

/// `sum_x H_t(x, y) mu(x)` at any `t > 0`.
pub fn kernel_mass(t: f64, p: &TreeParams, tol: f64) -> Result<WeightedSum> {
    Ok(StratumProfile::new(t, 0.0, KernelKind::H, p, tol)?.total())
}

/// `(sum over y <= x, sum over y not <= x)` of the weighted `|grad_x H|`.
pub fn split_sum_gradx(t: f64, eps: f64, p: &TreeParams, tol: f64) -> Result<(f64, f64)> {
    WeightedSumSpec::new(t, eps, KernelKind::GradX, Restriction::None)?;
    let profile = StratumProfile::new(t, eps, KernelKind::GradX, p, tol)?;
    let above = profile.partial(|k, j| j == k).value;
    let rest = profile.partial(|k, j| j != k).value;
    Ok((above, rest))
}

/// Supremum over horocycles of the restricted sum, for `t >= 1`.
pub fn horocycle_sup(
    t: f64,
    eps: f64,
    kind: KernelKind,
    p: &TreeParams,
    tol: f64,
) -> Result<HorocycleSup> {
    WeightedSumSpec::new(t, eps, kind, Restriction::None)?;
    Ok(StratumProfile::new(t, eps, kind, p, tol)?.horocycle_sup())
}

/// Least-squares decay fit of `log value` against `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    /// `max value * t^power`.
    pub constant: f64,
    /// `max / min` of `value * t^power` over the grid.
    pub spread: f64,
}

pub fn fit_decay(ts: &[f64], values: &[f64], power: f64) -> Result<DecayFit> {
    if ts.len() < 4 || ts.len() != values.len() {
        return Err(invalid("decay fit needs at least four matching points"));
    }
    if ts.iter().chain(values).any(|&v| !(v > 0.0)) {
        return Err(invalid("decay fit needs positive times and values"));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (exponent, intercept) =
        least_squares(&xs, &ys).ok_or_else(|| invalid("degenerate time grid"))?;
    let scaled: Vec<f64> = ts
        .iter()
        .zip(values)
        .map(|(t, v)| v * t.powf(power))
        .collect();
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(DecayFit {
        exponent,
        intercept,
        constant: hi,
        spread: hi / lo,
    })
}

/// `t = 1, 4, 16, ..., 4^(n-1)`.
pub fn power_of_four_grid(n: u32) -> Vec<f64> {
    (0..n).map(|i| 4f64.powi(i as i32)).collect()
}

/// One cell of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub q: u32,
    pub t: f64,
    pub epsilon: f64,
    pub kind: KernelKind,
    pub restriction: String,
    pub value: f64,
    pub tail_bound: f64,
    pub value_times_power: f64,
}

/// Fit summary for one `(q, epsilon, kind, restriction)` series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    pub q: u32,
    pub epsilon: f64,
    pub kind: KernelKind,
    pub restriction: String,
    pub claimed_power: f64,
    pub fit: DecayFit,
}

/// Sweep over `(q, t, epsilon, kind)` with fitted exponents and constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub fits: Vec<SeriesFit>,
}

/// Claimed decay power, including the extra `1/2` on horocycles.
pub fn claimed_power(kind: KernelKind, horocycle: bool) -> f64 {
    kind.claimed_power() + if horocycle { 0.5 } else { 0.0 }
}

/// Evaluate one cell; the horocycle variant reports the supremum over offsets.
pub fn sweep_cell(
    p: &TreeParams,
    t: f64,
    eps: f64,
    kind: KernelKind,
    horocycle: bool,
    tol: f64,
) -> Result<SweepCell> {
    WeightedSumSpec::new(t, eps, kind, Restriction::None)?;
    let profile = StratumProfile::new(t, eps, kind, p, tol)?;
    let value = if horocycle {
        profile.horocycle_sup().value
    } else {
        profile.total().value
    };
    let power = claimed_power(kind, horocycle);
    Ok(SweepCell {
        q: p.q(),
        t,
        epsilon: eps,
        kind,
        restriction: if horocycle { "horocycle" } else { "none" }.into(),
        value,
        tail_bound: profile.tail_bound,
        value_times_power: value * t.powf(power),
    })
}

/// Full sweep, with cells evaluated in parallel and returned in grid order.
pub fn sweep(
    qs: &[u32],
    ts: &[f64],
    epss: &[f64],
    kinds: &[KernelKind],
    horocycle: bool,
    tol: f64,
) -> Result<SweepReport> {
    use rayon::prelude::*;
    let mut grid = Vec::new();
    for &q in qs {
        for &eps in epss {
            for &kind in kinds {
                for &t in ts {
                    grid.push((q, eps, kind, t));
                }
            }
        }
    }
    let cells: Vec<SweepCell> = grid
        .par_iter()
        .map(|&(q, eps, kind, t)| sweep_cell(&TreeParams::new(q)?, t, eps, kind, horocycle, tol))
        .collect::<Result<_>>()?;
    let mut fits = Vec::new();
    for chunk in cells.chunks(ts.len()) {
        let c0 = &chunk[0];
        let values: Vec<f64> = chunk.iter().map(|c| c.value).collect();
        let power = claimed_power(c0.kind, horocycle);
        let fit = if ts.len() >= 4 {
            fit_decay(ts, &values, power)?
        } else {
            continue;
        };
        fits.push(SeriesFit {
            q: c0.q,
            epsilon: c0.epsilon,
            kind: c0.kind,
            restriction: c0.restriction.clone(),
            claimed_power: power,
            fit,
        });
    }
    Ok(SweepReport { cells, fits })
}

/// Spread of the empirical constants `max_t value * t^power` across `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QUniformity {
    pub constants: Vec<(u32, f64)>,
    pub spread: f64,
}

pub fn q_uniformity(
    kind: KernelKind,
    eps: f64,
    horocycle: bool,
    ts: &[f64],
    qs: &[u32],
    tol: f64,
) -> Result<QUniformity> {
    if qs.is_empty() || ts.is_empty() {
        return Err(invalid("q-uniformity needs nonempty grids"));
    }
    let report = sweep(qs, ts, &[eps], &[kind], horocycle, tol)?;
    let mut constants = Vec::new();
    for (i, &q) in qs.iter().enumerate() {
        let c = report.cells[i * ts.len()..(i + 1) * ts.len()]
            .iter()
            .map(|c| c.value_times_power)
            .fold(f64::NEG_INFINITY, f64::max);
        constants.push((q, c));
    }
    let hi = constants
        .iter()
        .map(|c| c.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = constants.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    Ok(QUniformity {
        constants,
        spread: hi / lo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u32) -> TreeParams {
        TreeParams::new(q).unwrap()
    }

    #[test]
    fn mass_is_one() {
        for q in [2, 3, 5] {
            for t in [0.5, 1.0, 4.0, 16.0] {
                let m = kernel_mass(t, &params(q), 1e-12).unwrap();
                assert!((m.value - 1.0).abs() < 1e-10, "q={q} t={t} {}", m.value);
            }
        }
    }

    #[test]
    fn gradient_mass_vanishes() {
        for t in [0.3, 2.0, 50.0] {
            let prof = StratumProfile::new(t, 0.0, KernelKind::GradX, &params(3), 1e-13).unwrap();
            assert!(prof.signed_total().value.abs() < 1e-11);
        }
    }

    #[test]
    fn spec_requires_large_time() {
        assert!(WeightedSumSpec::new(0.5, 0.0, KernelKind::H, Restriction::None).is_err());
        assert!(WeightedSumSpec::new(1.0, -1.0, KernelKind::H, Restriction::None).is_err());
    }

    #[test]
    fn split_parts_add_up() {
        let p = params(2);
        let (a, b) = split_sum_gradx(16.0, 1.0, &p, 1e-12).unwrap();
        let spec = WeightedSumSpec::new(16.0, 1.0, KernelKind::GradX, Restriction::None).unwrap();
        let total = weighted_sum(&spec, &p, 1e-12).unwrap().value;
        assert!((a + b - total).abs() < 1e-12 * total);
    }

    #[test]
    fn horocycles_partition_the_tree() {
        let p = params(3);
        let prof = StratumProfile::new(9.0, 0.5, KernelKind::GradXY, &p, 1e-12).unwrap();
        let k = i64::from(prof.k_max());
        let sum: f64 = (-k..=k).map(|m| prof.horocycle(m).value).sum();
        assert!((sum - prof.total().value).abs() < 1e-12 * sum);
        assert!(prof.horocycle_sup().value <= prof.total().value);
    }

    #[test]
    fn fit_recovers_power_law() {
        let ts = power_of_four_grid(6);
        let vs: Vec<f64> = ts.iter().map(|t| 3.0 * t.powf(-0.5)).collect();
        let f = fit_decay(&ts, &vs, 0.5).unwrap();
        assert!((f.exponent + 0.5).abs() < 1e-12);
        assert!((f.spread - 1.0).abs() < 1e-12);
        assert!(fit_decay(&ts[..3], &vs[..3], 0.5).is_err());
    }
}

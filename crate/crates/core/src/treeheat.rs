//! Heat kernel of the flow Laplacian and its flow gradients.
//!
//! `H_t(x, y) = q^{-(l(x) + l(y))/2} J_t(d(x, y))` with
//!
//! ```text
//! J_t(d) = (2/t) sum_{i >= 0} q^{-(2i+d)/2} (d+2i+1) hz(t, d+2i+1).
//! ```
//!
//! Internally everything is carried through the scaled profile
//! `Jr(d) = q^{d/2} J_t(d)`, which stays of moderate size for large `d`
//! and obeys `Jr(d) = (2/t)(d+1) hz(t, d+1) + Jr(d+2) / q`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::tree::{RelPos, TreeParams, VertexWord};
use crate::zheat::{self, HzTable};

/// Which kernel: `H` itself, `grad_x H`, `grad_y H` or `grad_y grad_x H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum KernelKind {
    H,
    GradX,
    GradY,
    GradXY,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::H,
        KernelKind::GradX,
        KernelKind::GradY,
        KernelKind::GradXY,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelKind::H => "H",
            KernelKind::GradX => "gradX",
            KernelKind::GradY => "gradY",
            KernelKind::GradXY => "gradXY",
        }
    }

    /// Power of `t` in the decay `t^{-power}` of the weighted `L^1` sum.
    pub fn claimed_power(self) -> f64 {
        match self {
            KernelKind::H => 0.0,
            KernelKind::GradX | KernelKind::GradY => 0.5,
            KernelKind::GradXY => 1.0,
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" => Ok(KernelKind::H),
            "gradx" => Ok(KernelKind::GradX),
            "grady" => Ok(KernelKind::GradY),
            "gradxy" => Ok(KernelKind::GradXY),
            _ => Err(invalid(format!("unknown kernel kind '{s}'"))),
        }
    }
}

/// Data determining the kernels at a pair `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelQuery {
    pub t: f64,
    pub d: u32,
    /// `l(x) + l(y)`.
    pub s: i64,
    /// Position of `x` relative to `y`.
    pub rel: RelPos,
}

impl KernelQuery {
    pub fn new(t: f64, d: u32, s: i64, rel: RelPos) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!(
                "time must be positive and finite, got {t}"
            )));
        }
        let ok = match rel {
            RelPos::Equal => d == 0,
            RelPos::Ancestor | RelPos::Descendant => d >= 1,
            RelPos::Incomparable => d >= 2,
        };
        if !ok {
            return Err(Error::InvalidQuery(format!(
                "relation {rel} is incompatible with distance {d}"
            )));
        }
        Ok(Self { t, d, s, rel })
    }

    pub fn from_pair(t: f64, x: &VertexWord, y: &VertexWord) -> Result<Self> {
        Self::new(t, x.distance(y)?, x.level() + y.level(), x.relation(y)?)
    }
}

/// Number of extra index pairs kept beyond the last requested distance.
pub(crate) fn padding(p: &TreeParams) -> usize {
    (40.0 / p.qf().log10()).ceil() as usize
}

/// Scaled profile `Jr(k) = q^{k/2} J_t(k)` for `k = 0..=k_max` at one time.
#[derive(Debug, Clone)]
pub struct JTable {
    t: f64,
    p: TreeParams,
    scaled: Vec<f64>,
}

impl JTable {
    pub fn new(t: f64, p: &TreeParams, k_max: usize) -> Result<Self> {
        let top = k_max + 2 * padding(p) + 2;
        let hz = HzTable::new(t, top + 2)?;
        Ok(Self::from_hz(&hz, p, k_max))
    }

    /// Build from an existing `hz` table, which must reach index
    /// `k_max + 2 * pad + 4`.
    pub fn from_hz(hz: &HzTable, p: &TreeParams, k_max: usize) -> Self {
        let t = hz.t();
        let top = (k_max + 2 * padding(p) + 2).min(hz.n_max().saturating_sub(2));
        let inv_q = 1.0 / p.qf();
        let mut full = vec![0.0; top + 3];
        for k in (0..=top).rev() {
            full[k] = 2.0 / t * (k + 1) as f64 * hz.get(k as i64 + 1) + full[k + 2] * inv_q;
        }
        full.truncate(k_max + 1);
        Self {
            t,
            p: *p,
            scaled: full,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn params(&self) -> &TreeParams {
        &self.p
    }

    pub fn k_max(&self) -> usize {
        self.scaled.len() - 1
    }

    /// `q^{k/2} J_t(k)`.
    pub fn scaled(&self, k: u32) -> f64 {
        self.scaled[k as usize]
    }

    pub fn scaled_values(&self) -> &[f64] {
        &self.scaled
    }

    /// `J_t(k)`.
    pub fn j(&self, k: u32) -> f64 {
        self.scaled(k) * self.p.pow(-0.5 * f64::from(k))
    }

    fn require(&self, d: u32, kind: KernelKind) -> Result<()> {
        let need = d as usize + usize::from(kind != KernelKind::H);
        if need > self.k_max() {
            return Err(invalid(format!(
                "distance {d} beyond the table (k_max = {})",
                self.k_max()
            )));
        }
        Ok(())
    }

    /// The bracket `r` with `kernel(x, y) = q^{-(s + d)/2} r`, which depends on
    /// `(d, rel)` only.
    pub fn reduced(&self, kind: KernelKind, d: u32, rel: RelPos) -> f64 {
        reduced_profile(&self.scaled, 1.0 / self.p.qf(), kind, d, rel)
    }

    pub fn eval(&self, kind: KernelKind, query: &KernelQuery) -> Result<f64> {
        if (query.t - self.t).abs() > 0.0 {
            return Err(invalid("query time differs from the table time"));
        }
        self.require(query.d, kind)?;
        let r = self.reduced(kind, query.d, query.rel);
        let e = -0.5 * (query.s as f64 + f64::from(query.d));
        Ok(r * self.p.pow(e))
    }
}

/// Reduced kernel profile from a scaled `Jr` vector; shared by the heat and
/// the time-integrated (Riesz) kernels, which obey the same stencils.
pub fn reduced_profile(jr: &[f64], inv_q: f64, kind: KernelKind, d: u32, rel: RelPos) -> f64 {
    let k = d as usize;
    let at = |i: usize| jr[i];
    match kind {
        KernelKind::H => at(k),
        KernelKind::GradX => {
            if rel.second_below_first() {
                at(k) - at(k + 1) * inv_q
            } else {
                at(k) - at(k - 1)
            }
        }
        KernelKind::GradY => {
            if rel.first_below_second() {
                at(k) - at(k + 1) * inv_q
            } else {
                at(k) - at(k - 1)
            }
        }
        KernelKind::GradXY => match rel {
            RelPos::Equal => at(0) - 2.0 * at(1) * inv_q + at(0) * inv_q,
            RelPos::Ancestor | RelPos::Descendant => {
                at(k) - at(k + 1) * inv_q - at(k - 1) + at(k) * inv_q
            }
            RelPos::Incomparable => at(k) - 2.0 * at(k - 1) + at(k - 2),
        },
    }
}

/// One certified evaluation of `J_t(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JEval {
    pub value: f64,
    pub first_term: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// `J_t(d)` by its series, truncated once the geometric tail bound
/// `term * rho / (1 - rho)`, `rho = (d+2i+3) / (q (d+2i+1))`, is below `tol`
/// in absolute terms and `1e-17` relative to the partial sum.
pub fn j_certified(t: f64, d: u32, p: &TreeParams, tol: f64) -> Result<JEval> {
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut n_max = d as usize + 64;
    loop {
        let hz = HzTable::new(t, n_max)?;
        let inv_q = 1.0 / p.qf();
        let lead = p.pow(-0.5 * f64::from(d)) * 2.0 / t;
        let mut sum = crate::numeric::CompensatedSum::new();
        let mut first = 0.0;
        let mut i = 0usize;
        while d as usize + 2 * i + 1 <= n_max {
            let m = d as usize + 2 * i + 1;
            let term = lead * inv_q.powi(i as i32) * m as f64 * hz.get(m as i64);
            if i == 0 {
                first = term;
            }
            sum.add(term);
            let rho = (m + 2) as f64 / (m as f64 * p.qf());
            let tail = term * rho / (1.0 - rho);
            if i >= 1 && tail <= tol && tail <= 1e-17 * sum.value() {
                return Ok(JEval {
                    value: sum.value(),
                    first_term: first,
                    terms: i + 1,
                    tail_bound: tail,
                });
            }
            i += 1;
        }
        n_max *= 2;
    }
}

/// `H_t(x, y)` for one query.
pub fn heat_kernel(query: &KernelQuery, p: &TreeParams) -> Result<f64> {
    kernel(KernelKind::H, query, p)
}

/// Any of the four kernels for one query, through a fresh table.
pub fn kernel(kind: KernelKind, query: &KernelQuery, p: &TreeParams) -> Result<f64> {
    let table = JTable::new(query.t, p, query.d as usize + 1)?;
    table.eval(kind, query)
}

pub fn grad_x(query: &KernelQuery, p: &TreeParams) -> Result<f64> {
    kernel(KernelKind::GradX, query, p)
}

pub fn grad_y(query: &KernelQuery, p: &TreeParams) -> Result<f64> {
    kernel(KernelKind::GradY, query, p)
}

pub fn grad_xy(query: &KernelQuery, p: &TreeParams) -> Result<f64> {
    kernel(KernelKind::GradXY, query, p)
}

/// The combinatorial heat kernel `h_t(x, y)` of `Delta` at distance `d`,
/// summed from the reference `hz` series at time `t (1 - b)`.
pub fn cms_ht(t: f64, d: u32, p: &TreeParams, tol: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    let b = p.b();
    let tau = t * (1.0 - b);
    let ln_lead = (2.0 / tau).ln() - b * t - 0.5 * f64::from(d) * p.ln_q();
    let inv_q = 1.0 / p.qf();
    let mut sum = crate::numeric::CompensatedSum::new();
    let mut weight = 1.0;
    for i in 0.. {
        let m = i64::from(d) + 2 * i + 1;
        let term = weight * m as f64 * zheat::ln_hz(tau, m)?.exp();
        sum.add(term);
        let rho = (m + 2) as f64 / (m as f64 * p.qf());
        let tail = term * rho / (1.0 - rho);
        if i >= 1 && tail * ln_lead.exp() <= tol * 1e-3 && tail <= 1e-17 * sum.value() {
            break;
        }
        weight *= inv_q;
    }
    Ok((ln_lead + sum.value().ln()).exp())
}

/// Apply the flow Laplacian in `x` to `x -> F(x, y)` where `F` is given by a
/// closure on vertex pairs:
/// `L F(x) = F(x) - F(p(x))/2 - (1/(2q)) sum_{c in s(x)} F(c)`.
pub fn flow_laplacian_at<F>(x: &VertexWord, p: &TreeParams, f: F) -> Result<f64>
where
    F: Fn(&VertexWord) -> Result<f64>,
{
    let up = x.predecessor().ok_or_else(|| Error::TruncationOverflow {
        vertex: x.to_string(),
        needed: 1,
        available: 0,
    })?;
    let mut down = 0.0;
    for c in x.successors(p) {
        down += f(&c)?;
    }
    Ok(f(x)? - 0.5 * f(&up)? - down / (2.0 * p.qf()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: u32) -> TreeParams {
        TreeParams::new(q).unwrap()
    }

    #[test]
    fn table_matches_certified_series() {
        for q in [2, 3, 7] {
            let p = params(q);
            for t in [0.5, 3.0, 40.0, 900.0] {
                let table = JTable::new(t, &p, 64).unwrap();
                for d in [0u32, 1, 5, 20, 60] {
                    let c = j_certified(t, d, &p, 1e-300).unwrap();
                    let v = table.j(d);
                    assert!((v - c.value).abs() <= 1e-12 * c.value, "q={q} t={t} d={d}");
                }
            }
        }
    }

    #[test]
    fn j_dominates_first_term() {
        let p = params(2);
        let e = j_certified(2.0, 3, &p, 1e-14).unwrap();
        assert!(e.value >= e.first_term);
        assert!(e.value / e.first_term <= 6.0);
    }

    #[test]
    fn query_validation() {
        assert!(KernelQuery::new(1.0, 0, 0, RelPos::Equal).is_ok());
        assert!(KernelQuery::new(1.0, 1, 0, RelPos::Equal).is_err());
        assert!(KernelQuery::new(1.0, 0, 0, RelPos::Ancestor).is_err());
        assert!(KernelQuery::new(1.0, 1, 0, RelPos::Incomparable).is_err());
        assert!(KernelQuery::new(0.0, 0, 0, RelPos::Equal).is_err());
    }

    #[test]
    fn equal_mixed_gradient_composes_single_gradients() {
        let p = params(3);
        let table = JTable::new(1.5, &p, 4).unwrap();
        let jr = table.scaled_values();
        let iq = 1.0 / 3.0;
        let want = jr[0] - 2.0 * jr[1] * iq + jr[0] * iq;
        assert_eq!(table.reduced(KernelKind::GradXY, 0, RelPos::Equal), want);
    }

    #[test]
    fn cms_matches_flow_kernel() {
        for q in [2, 3, 5] {
            let p = params(q);
            let b = p.b();
            for t in [0.5, 2.0, 9.0] {
                for d in [0u32, 1, 4, 9] {
                    let s = -3i64;
                    let h = p.pow(-0.5 * s as f64)
                        * (b * t / (1.0 - b)).exp()
                        * cms_ht(t / (1.0 - b), d, &p, 1e-14).unwrap();
                    let want = JTable::new(t, &p, 12).unwrap().j(d) * p.pow(-0.5 * s as f64);
                    assert!((h - want).abs() <= 1e-10 * want, "q={q} t={t} d={d}");
                }
            }
        }
    }

    #[test]
    fn cms_tends_to_identity() {
        let p = params(2);
        assert!((cms_ht(1e-6, 0, &p, 1e-14).unwrap() - 1.0).abs() < 1e-5);
    }
}

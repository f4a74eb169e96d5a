//! Riesz transform kernel `R(x, y) = pi^{-1/2} int_0^inf t^{-1/2} grad_x H_t(x, y) dt`
//! and its dyadic pieces `R0` (over `(0, 1)`) and `K_n` (over `[2^n, 2^{n+1}]`).
//!
//! Every stencil is linear in the scaled profile `Jr_t`, so each piece is the
//! stencil applied to a time integral of `Jr_t`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimates::{
    certified_radius, tail_beyond, DistanceWeight, StratumProfile, WeightedSum,
};
use crate::numeric::CompensatedSum;
use crate::quad::{self, Integral, Rule};
use crate::tree::{pair_strata, RelPos, TreeParams, VertexWord};
use crate::treeheat::{reduced_profile, JTable, KernelKind};

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// CZ scale constant `c = 2^{-1/2}`.
pub const CZ_SCALE: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Exponent `a` of the polynomial weight `(1 + c^n d)^a`.
pub const CZ_POLY_EXPONENT: f64 = 2.0;

/// Pair data for the time-integrated kernels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RieszQuery {
    pub d: u32,
    /// `l(x) + l(y)`.
    pub s: i64,
    pub rel: RelPos,
}

impl RieszQuery {
    pub fn new(d: u32, s: i64, rel: RelPos) -> Result<Self> {
        if d < rel.min_distance() || (rel == RelPos::Equal && d != 0) {
            return Err(Error::InvalidQuery(format!(
                "relation {rel} is incompatible with distance {d}"
            )));
        }
        Ok(Self { d, s, rel })
    }

    pub fn from_pair(x: &VertexWord, y: &VertexWord) -> Result<Self> {
        Self::new(x.distance(y)?, x.level() + y.level(), x.relation(y)?)
    }
}

fn jr(t: f64, p: &TreeParams, len: usize) -> Result<Vec<f64>> {
    Ok(JTable::new(t, p, len - 1)?.scaled_values().to_vec())
}

/// `int_0^1 t^{-1/2} Jr_t(k) dt` for `k < len`, through `t = u^2`.
pub fn small_time_integral(p: &TreeParams, len: usize, tol: f64) -> Result<Integral<Vec<f64>>> {
    let rule = Rule::new(quad::DEFAULT_DEGREE)?;
    quad::integrate_vec(&rule, 0.0, 1.0, tol, |u| {
        let mut v = jr(u * u, p, len)?;
        v.iter_mut().for_each(|x| *x *= 2.0);
        Ok(v)
    })
}

/// `int_{2^n}^{2^{n+1}} t^{-1/2} Jr_t(k) dt` for `k < len`.
pub fn block_integral(n: u32, p: &TreeParams, len: usize, tol: f64) -> Result<Integral<Vec<f64>>> {
    let rule = Rule::new(quad::DEFAULT_DEGREE)?;
    let a = 2f64.powi(n as i32);
    quad::integrate_vec(&rule, a, 2.0 * a, tol, |t| {
        let w = t.powf(-0.5);
        let mut v = jr(t, p, len)?;
        v.iter_mut().for_each(|x| *x *= w);
        Ok(v)
    })
}

/// Number of series indices `i` kept in the large-time tail: `q^{-i} <= 1e-20`
/// beyond.
fn tail_terms(p: &TreeParams) -> u32 {
    (20.0 / p.qf().log10()).ceil() as u32
}

/// `int_T^inf t^{-1/2} Jr_t(k) dt` for `k < len` from the large-argument
/// expansion `hz(t, m) ~ (2 pi t)^{-1/2} sum_j (-1)^j a_j(m) t^{-j}`.
/// Returns the values and an error estimate; requires `T >= 32 m^2` for the
/// largest index `m` involved.
pub fn large_time_tail(big_t: f64, p: &TreeParams, len: usize) -> Result<(Vec<f64>, f64)> {
    let i_max = tail_terms(p);
    let m_max = (len as u32 + 2 * i_max) as f64;
    if big_t < 32.0 * m_max * m_max {
        return Err(invalid(format!(
            "tail start {big_t} too small for index {m_max}"
        )));
    }
    const ORDERS: usize = 6;
    let c = 2.0 / (2.0 * std::f64::consts::PI).sqrt();
    let inv_q = 1.0 / p.qf();
    let mut err = 0.0f64;
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        let mut s = CompensatedSum::new();
        let mut w = 1.0;
        for i in 0..=i_max {
            let m = (k + 2 * i as usize + 1) as f64;
            let mut a = 1.0;
            let mut inner = 0.0;
            for j in 0..=ORDERS {
                if j > 0 {
                    let l = j as f64;
                    a *= (4.0 * m * m - (2.0 * l - 1.0).powi(2)) / (l * 8.0);
                }
                let term = a * big_t.powi(-(j as i32) - 1) / (1.0 + j as f64);
                if j == ORDERS {
                    err = err.max(w * c * m * term.abs());
                } else {
                    inner += if j % 2 == 0 { term } else { -term };
                }
            }
            s.add(w * c * m * inner);
            w *= inv_q;
        }
        // omitted i > i_max: hz <= sqrt(pi / (8 t)), so each contributes at most
        // q^{-i} 2 m sqrt(pi/8) / T
        let m_next = (k + 2 * i_max as usize + 3) as f64;
        err =
            err.max(w * 2.0 * m_next * (std::f64::consts::PI / 8.0).sqrt() / big_t / (1.0 - inv_q));
        out.push(s.value());
    }
    Ok((out, err))
}

/// Time integrals of `Jr` split into `R0`, the dyadic blocks and the tail.
#[derive(Debug, Clone, Serialize)]
pub struct RieszKernel {
    q: u32,
    /// `k = 0..len`.
    pub len: usize,
    pub small_time: Vec<f64>,
    pub blocks: Vec<Vec<f64>>,
    pub tail: Vec<f64>,
    /// Sum of the a posteriori errors of every piece.
    pub error: f64,
    /// `int_0^inf t^{-1/2} Jr_t(k) dt`.
    pub total: Vec<f64>,
}

impl RieszKernel {
    /// Pieces for distances `d <= d_max`.
    pub fn new(p: &TreeParams, d_max: u32, tol: f64) -> Result<Self> {
        let len = d_max as usize + 2;
        let m_max = (len as u32 + 2 * tail_terms(p)) as f64;
        let n_blocks = (32.0 * m_max * m_max).log2().ceil() as u32;
        let r0 = small_time_integral(p, len, tol)?;
        let mut error = r0.error;
        let mut blocks = Vec::new();
        for n in 0..n_blocks {
            let b = block_integral(n, p, len, tol)?;
            error += b.error;
            blocks.push(b.value);
        }
        let (tail, terr) = large_time_tail(2f64.powi(n_blocks as i32), p, len)?;
        error += terr;
        let total = (0..len)
            .map(|k| {
                let mut s = CompensatedSum::new();
                s.add(r0.value[k]);
                for b in &blocks {
                    s.add(b[k]);
                }
                s.add(tail[k]);
                s.value()
            })
            .collect();
        Ok(Self {
            q: p.q(),
            len,
            small_time: r0.value,
            blocks,
            tail,
            error,
            total,
        })
    }

    fn inv_q(&self) -> f64 {
        1.0 / f64::from(self.q)
    }

    fn check(&self, d: u32) -> Result<()> {
        if d as usize + 1 >= self.len {
            return Err(invalid(format!("distance {d} beyond the kernel table")));
        }
        Ok(())
    }

    /// Reduced `R`: `R(x, y) = q^{-(s+d)/2} reduced(d, rel)`.
    pub fn reduced(&self, d: u32, rel: RelPos) -> f64 {
        FRAC_1_SQRT_PI * reduced_profile(&self.total, self.inv_q(), KernelKind::GradX, d, rel)
    }

    pub fn reduced_small_time(&self, d: u32, rel: RelPos) -> f64 {
        FRAC_1_SQRT_PI * reduced_profile(&self.small_time, self.inv_q(), KernelKind::GradX, d, rel)
    }

    pub fn reduced_block(&self, n: usize, d: u32, rel: RelPos) -> f64 {
        FRAC_1_SQRT_PI * reduced_profile(&self.blocks[n], self.inv_q(), KernelKind::GradX, d, rel)
    }

    pub fn reduced_tail(&self, d: u32, rel: RelPos) -> f64 {
        FRAC_1_SQRT_PI * reduced_profile(&self.tail, self.inv_q(), KernelKind::GradX, d, rel)
    }

    fn scale(&self, query: &RieszQuery) -> f64 {
        (-0.5 * (query.s as f64 + f64::from(query.d)) * f64::from(self.q).ln()).exp()
    }

    /// `R(x, y)`.
    pub fn kernel(&self, query: &RieszQuery) -> Result<f64> {
        self.check(query.d)?;
        Ok(self.scale(query) * self.reduced(query.d, query.rel))
    }

    /// `R0(x, y)`.
    pub fn small_time_kernel(&self, query: &RieszQuery) -> Result<f64> {
        self.check(query.d)?;
        Ok(self.scale(query) * self.reduced_small_time(query.d, query.rel))
    }

    /// `K_n(x, y)`.
    pub fn block_kernel(&self, n: usize, query: &RieszQuery) -> Result<f64> {
        self.check(query.d)?;
        if n >= self.blocks.len() {
            return Err(invalid(format!("block {n} not computed")));
        }
        Ok(self.scale(query) * self.reduced_block(n, query.d, query.rel))
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }
}

/// `R(x, y)` for one query.
pub fn riesz_kernel(query: &RieszQuery, p: &TreeParams, tol: f64) -> Result<f64> {
    RieszKernel::new(p, query.d + 1, tol)?.kernel(query)
}

fn rows_from(
    values: &[f64],
    inv_q: f64,
    kind: KernelKind,
    k_max: u32,
    weight: DistanceWeight,
    transpose: bool,
) -> Vec<[f64; 3]> {
    (0..=k_max)
        .map(|k| {
            let w = FRAC_1_SQRT_PI * weight.at(k);
            let mut row = [0.0; 3];
            let first = if k == 0 {
                RelPos::Equal
            } else {
                RelPos::Ancestor
            };
            for (idx, rel) in [first, RelPos::Descendant, RelPos::Incomparable]
                .into_iter()
                .enumerate()
            {
                if k >= rel.min_distance() {
                    let r = if transpose { rel.inverse() } else { rel };
                    row[idx] = w * reduced_profile(values, inv_q, kind, k, r);
                }
            }
            row
        })
        .collect()
}

/// `int_a^b pi^{-1/2} t^{-1/2} tail(t) dt` by quadrature.
fn integrated_tail<F>(a: f64, b: f64, f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let rule = Rule::new(quad::DEFAULT_DEGREE)?;
    let r = quad::integrate(&rule, a, b, 1e-3, |t| Ok(f(t)? * t.powf(-0.5)))?;
    Ok(FRAC_1_SQRT_PI * (r.value + r.error))
}

/// `L^1` sums of `R0`: `(sum_x |R0(x, y)| mu(x), sum_y |R0(x, y)| mu(y))`,
/// plus the signed column sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallTimeSums {
    pub column: WeightedSum,
    pub row: WeightedSum,
    pub signed_column: f64,
}

pub fn r0_l1_sums(p: &TreeParams, tol: f64) -> Result<SmallTimeSums> {
    let w = DistanceWeight::Exp { rate: 0.0 };
    let (k_max, _) = certified_radius(1.0, w, KernelKind::GradX, p, tol)?;
    let tail = integrated_tail(1e-12, 1.0, |t| {
        tail_beyond(t, w, KernelKind::GradX, p, k_max).map(|x| x.min(1e300))
    })?;
    let vals = small_time_integral(p, k_max as usize + 2, tol)?;
    let inv_q = 1.0 / p.qf();
    let col_rows = rows_from(&vals.value, inv_q, KernelKind::GradX, k_max, w, false);
    let row_rows = rows_from(&vals.value, inv_q, KernelKind::GradX, k_max, w, true);
    let col = StratumProfile::from_rows(1.0, w, KernelKind::GradX, p, col_rows, tail);
    let row = StratumProfile::from_rows(1.0, w, KernelKind::GradX, p, row_rows, tail);
    Ok(SmallTimeSums {
        column: col.total(),
        row: row.total(),
        signed_column: col.signed_total().value,
    })
}

/// Weight used in the block sums: `e^{eps d / 2^{n/2}}` or
/// `(1 + 2^{-n/2} d)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockWeight {
    Exp,
    Poly,
}

fn block_weight(n: u32, eps: f64, form: BlockWeight, t: f64) -> DistanceWeight {
    let scale = CZ_SCALE.powi(n as i32);
    match form {
        // e^{eps d / 2^{n/2}} = e^{eps_t d / sqrt t} with eps_t = eps sqrt(t) / 2^{n/2}
        BlockWeight::Exp => DistanceWeight::Exp { rate: eps * scale },
        BlockWeight::Poly => {
            let _ = t;
            DistanceWeight::Poly {
                c: scale,
                a: CZ_POLY_EXPONENT,
            }
        }
    }
}

/// Certified upper bound for `sup_y sum_x |K_n(x, y)| w(d(x, y)) mu(x)`,
/// obtained by moving the absolute value inside the time integral.
pub fn kn_weighted_sum(
    n: u32,
    eps: f64,
    form: BlockWeight,
    p: &TreeParams,
    tol: f64,
) -> Result<Integral<f64>> {
    if !(eps >= 0.0) {
        return Err(invalid("epsilon must be nonnegative"));
    }
    let rule = Rule::new(quad::DEFAULT_DEGREE)?;
    let a = 2f64.powi(n as i32);
    let r = quad::integrate(&rule, a, 2.0 * a, tol, |t| {
        let w = block_weight(n, eps, form, t);
        let prof = StratumProfile::with_weight(t, w, KernelKind::GradX, p, tol * 1e-2)?;
        Ok(FRAC_1_SQRT_PI * t.powf(-0.5) * (prof.total().value + prof.tail_bound))
    })?;
    Ok(r)
}

/// Block integrals of `Jr` out to the certified radius of `kind` on block `n`,
/// with the matching tail bound.
struct BlockProfile {
    k_max: u32,
    values: Vec<f64>,
    error: f64,
    tail: f64,
}

fn block_profile(
    n: u32,
    weight: DistanceWeight,
    kind: KernelKind,
    p: &TreeParams,
    tol: f64,
) -> Result<BlockProfile> {
    let a = 2f64.powi(n as i32);
    let (k_max, _) = certified_radius(2.0 * a, weight, kind, p, tol)?;
    let tail = integrated_tail(a, 2.0 * a, |t| tail_beyond(t, weight, kind, p, k_max))?;
    let b = block_integral(n, p, k_max as usize + 2, tol)?;
    Ok(BlockProfile {
        k_max,
        values: b.value,
        error: b.error,
        tail,
    })
}

/// `sup_y sum_x |grad_y K_n(x, y)| e^{eps d / 2^{n/2}} mu(x)` from the signed
/// block integrals and the mixed-gradient stencil.
pub fn kn_grad_sum(n: u32, eps: f64, p: &TreeParams, tol: f64) -> Result<WeightedSum> {
    if !(eps >= 0.0) {
        return Err(invalid("epsilon must be nonnegative"));
    }
    let w = block_weight(n, eps, BlockWeight::Exp, 0.0);
    let b = block_profile(n, w, KernelKind::GradXY, p, tol)?;
    let rows = rows_from(
        &b.values,
        1.0 / p.qf(),
        KernelKind::GradXY,
        b.k_max,
        w,
        false,
    );
    let bound = b.tail + b.error * FRAC_1_SQRT_PI * 4.0 * f64::from(b.k_max + 1).powi(2);
    let prof =
        StratumProfile::from_rows(2f64.powi(n as i32), w, KernelKind::GradXY, p, rows, bound);
    Ok(prof.total())
}

/// Left side and telescoped bound of the Lipschitz condition on `K_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzCheck {
    pub n: u32,
    pub distance: u32,
    /// `sum_x |K_n(x, y) - K_n(x, z)| mu(x)`.
    pub lhs: f64,
    /// Bound on what lies beyond the summation radius.
    pub lhs_tail: f64,
    /// `kn_grad_sum(n, 0) d(y, z)`.
    pub bound: f64,
}

impl LipschitzCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.lhs <= self.bound + tol
    }
}

pub fn lipschitz_check(
    n: u32,
    y: &VertexWord,
    z: &VertexWord,
    p: &TreeParams,
    tol: f64,
) -> Result<LipschitzCheck> {
    let dist = y.distance(z)?;
    let grad = kn_grad_sum(n, 0.0, p, tol)?;
    let bound = (grad.value + grad.tail_bound) * f64::from(dist);
    if dist == 0 {
        return Ok(LipschitzCheck {
            n,
            distance: 0,
            lhs: 0.0,
            lhs_tail: 0.0,
            bound,
        });
    }
    let w = DistanceWeight::Exp { rate: 0.0 };
    let b = block_profile(n, w, KernelKind::GradX, p, tol)?;
    let radius = b.k_max;
    let values = block_integral(n, p, (radius + dist) as usize + 2, tol)?.value;
    let inv_q = 1.0 / p.qf();
    let half_ln_q = 0.5 * p.ln_q();
    let dl = (y.level() - z.level()) as f64;
    let mut lhs = CompensatedSum::new();
    for c in pair_strata(y, z, radius, p)? {
        let off = c.level_offset as f64;
        let ky = reduced_profile(&values, inv_q, KernelKind::GradX, c.d_y, c.rel_y);
        let kz = reduced_profile(&values, inv_q, KernelKind::GradX, c.d_z, c.rel_z);
        // mu(x) K(x, y) = q^{(l(x) - l(y) - d)/2} Kr
        let a = (c.ln_count + (off - f64::from(c.d_y)) * half_ln_q).exp() * ky;
        let b = (c.ln_count + (off + dl - f64::from(c.d_z)) * half_ln_q).exp() * kz;
        lhs.add(FRAC_1_SQRT_PI * (a - b).abs());
    }
    Ok(LipschitzCheck {
        n,
        distance: dist,
        lhs: lhs.value(),
        lhs_tail: 2.0 * b.tail,
        bound,
    })
}

/// Outcome of the weak-type probe on the normalized point mass at `y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weak11Probe {
    pub ball_radius: u32,
    /// `(lambda, lambda * mu{|R(., y)| > lambda})` per grid point.
    pub profile: Vec<(f64, f64)>,
    pub sup: f64,
    pub argmax_lambda: f64,
    /// Whether the smallest `lambda` still selects vertices on the boundary
    /// sphere, so that a larger ball could change the answer.
    pub boundary_active: bool,
}

/// `sup_lambda lambda mu{x in B(y, r) : |R(x, y)| > lambda}`; the answer does
/// not depend on `y`, which is placed at level 0.
pub fn weak11_probe(
    kernel: &RieszKernel,
    p: &TreeParams,
    lambdas: &[f64],
    ball_radius: u32,
) -> Result<Weak11Probe> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(invalid("lambda grid must be nonempty and positive"));
    }
    kernel.check(ball_radius)?;
    let ln_q = p.ln_q();
    // (ln |R|, mass) per stratum
    let mut strata = Vec::new();
    for k in 0..=ball_radius {
        for j in 0..=k {
            let rel = RelPos::of_stratum(k, j);
            let r = kernel.reduced(k, rel).abs();
            if r == 0.0 {
                continue;
            }
            let ln_r = r.ln() - f64::from(j) * ln_q;
            let ln_mass =
                crate::tree::ln_stratum_count(k, j, p) + (2.0 * f64::from(j) - f64::from(k)) * ln_q;
            strata.push((k, ln_r, ln_mass.exp()));
        }
    }
    let mut profile = Vec::new();
    let mut best = (0.0, f64::NEG_INFINITY);
    let mut boundary_active = false;
    let lambda_min = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    for &lambda in lambdas {
        let ln_l = lambda.ln();
        let mass: f64 = strata.iter().filter(|s| s.1 > ln_l).map(|s| s.2).sum();
        let v = lambda * mass;
        if v > best.1 {
            best = (lambda, v);
        }
        profile.push((lambda, v));
    }
    let ln_min = lambda_min.ln();
    if strata.iter().any(|s| s.0 == ball_radius && s.1 > ln_min) {
        boundary_active = true;
    }
    Ok(Weak11Probe {
        ball_radius,
        profile,
        sup: best.1,
        argmax_lambda: best.0,
        boundary_active,
    })
}

/// `2^{-10}, 2^{-9}, ..., 2^4`.
pub fn default_lambda_grid() -> Vec<f64> {
    (-10..=4).map(|e| 2f64.powi(e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_expansion_matches_quadrature() {
        let p = TreeParams::new(3).unwrap();
        let len = 3;
        let big_t = 2f64.powi(18);
        let (tail, err) = large_time_tail(big_t, &p, len).unwrap();
        let (tail2, _) = large_time_tail(2.0 * big_t, &p, len).unwrap();
        let block = block_integral(18, &p, len, 1e-14).unwrap();
        for k in 0..len {
            assert!(
                (tail[k] - tail2[k] - block.value[k]).abs() < 1e-12 + err,
                "k={k}"
            );
        }
    }

    #[test]
    fn query_validation() {
        assert!(RieszQuery::new(0, 0, RelPos::Equal).is_ok());
        assert!(RieszQuery::new(1, 0, RelPos::Incomparable).is_err());
    }
}

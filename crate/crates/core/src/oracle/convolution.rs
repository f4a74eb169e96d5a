//! Heat kernel identities evaluated as explicit sums over the tree.

use crate::error::Result;
use crate::numeric::CompensatedSum;
use crate::tree::{pair_strata, TreeParams, VertexWord};
use crate::treeheat::{JTable, KernelKind};

/// `sum_v H_t(x, v) H_s(v, y) mu(v)` over all `v` within `radius` of the
/// geodesic `[x, y]`, in the normalization of `J`: the common factor
/// `q^{-(l(x) + l(y))/2}` is removed.
pub fn semigroup_sum(
    x: &VertexWord,
    y: &VertexWord,
    t: f64,
    s: f64,
    p: &TreeParams,
    radius: u32,
) -> Result<f64> {
    let k_max = (radius + x.distance(y)?) as usize + 1;
    let jt = JTable::new(t, p, k_max)?;
    let js = JTable::new(s, p, k_max)?;
    let mut acc = CompensatedSum::new();
    for c in pair_strata(x, y, radius, p)? {
        let e = c.ln_count - 0.5 * f64::from(c.d_y + c.d_z) * p.ln_q();
        acc.add(e.exp() * jt.scaled(c.d_y) * js.scaled(c.d_z));
    }
    Ok(acc.value())
}

/// `sum_v grad_x H_{t/2}(x, v) grad_y H_{t/2}(v, y) mu(v)`, which equals the
/// mixed gradient of `H_t` at `(x, y)`.
pub fn mixed_gradient_sum(
    x: &VertexWord,
    y: &VertexWord,
    t: f64,
    p: &TreeParams,
    radius: u32,
) -> Result<f64> {
    let k_max = (radius + x.distance(y)?) as usize + 2;
    let jt = JTable::new(0.5 * t, p, k_max)?;
    let half_ln_q = 0.5 * p.ln_q();
    let lx = x.level() as f64;
    let ly = y.level() as f64;
    let mut acc = CompensatedSum::new();
    for c in pair_strata(x, y, radius, p)? {
        let gx = jt.reduced(KernelKind::GradX, c.d_y, c.rel_y.inverse());
        let gy = jt.reduced(KernelKind::GradY, c.d_z, c.rel_z);
        let e = -(lx + ly + f64::from(c.d_y) + f64::from(c.d_z)) * half_ln_q;
        acc.add((c.ln_count + e).exp() * gx * gy);
    }
    Ok(acc.value())
}

/// `int_0^inf t^{-1/2} q^{k/2} J_t(k) dt` in closed form:
/// `2 sqrt(2/pi) sum_i q^{-i} m / (m^2 - 1/4)` with `m = k + 2i + 1`.
pub fn riesz_scaled_closed_form(k: u32, p: &TreeParams) -> f64 {
    let c = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    let inv_q = 1.0 / p.qf();
    let mut acc = CompensatedSum::new();
    let mut w = 1.0;
    for i in 0.. {
        let m = f64::from(k) + 2.0 * f64::from(i) + 1.0;
        let term = w * m / (m * m - 0.25);
        acc.add(term);
        if term < 1e-18 * acc.value() {
            break;
        }
        w *= inv_q;
    }
    c * acc.value()
}

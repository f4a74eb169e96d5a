//! The acceptance suite: thirteen numbered checks, each reporting measured
//! quantities and a verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::estimates::{fit_decay, horocycle_sup, kernel_mass, q_uniformity, sweep, HorocycleSup};
use crate::oracle::{
    ball_heat_profile, ball_sphere_mass, default_targets, mc_heat, spectrum_summary, z_heat_taylor,
    WalkConfig,
};
use crate::riesz::{
    default_lambda_grid, kn_grad_sum, kn_weighted_sum, lipschitz_check, weak11_probe, BlockWeight,
    RieszKernel,
};
use crate::tree::{TreeParams, VertexWord};
use crate::treeheat::{heat_kernel, j_certified, JTable, KernelKind, KernelQuery};
use crate::zheat::{hz, hz_recurrence_residual, log_grid, phi, phi_decay_constant};

pub const CRITERIA: [(u8, &str); 13] = [
    (1, "stochasticity"),
    (2, "z_oracle"),
    (3, "recurrence"),
    (4, "tree_oracle"),
    (5, "decay_scaling"),
    (6, "horocycle"),
    (7, "q_uniformity"),
    (8, "phi_lemma"),
    (9, "comparability"),
    (10, "block_estimates"),
    (11, "spectrum"),
    (12, "weak_type"),
    (13, "monte_carlo"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub qs: Vec<u32>,
    pub uniformity_qs: Vec<u32>,
    pub ts: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub n_max: u32,
    pub tol: f64,
    pub kernel_radius: u32,
    pub spectrum_radius: u32,
    pub seed: u64,
    pub replicates: u64,
    pub lipschitz_pairs: usize,
    /// Decay power tested for the heat kernel itself.
    pub h_power: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            qs: vec![2, 3],
            uniformity_qs: vec![2, 3, 5, 7],
            ts: (0..7).map(|i| 4f64.powi(i)).collect(),
            epsilons: vec![0.0, 1.0],
            n_max: 12,
            tol: 1e-10,
            kernel_radius: 25,
            spectrum_radius: 10,
            seed: 20240601,
            replicates: 1_000_000,
            lipschitz_pairs: 50,
            h_power: 0.0,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qs.is_empty() || self.uniformity_qs.is_empty() || self.epsilons.is_empty() {
            return Err(invalid("grids must be nonempty"));
        }
        if self.ts.len() < 4 {
            return Err(invalid("the time grid needs at least four points"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.n_max < 5 {
            return Err(invalid("block range must reach n = 5"));
        }
        for &q in self.qs.iter().chain(&self.uniformity_qs) {
            TreeParams::new(q)?;
        }
        Ok(())
    }

    fn power(&self, kind: KernelKind) -> f64 {
        match kind {
            KernelKind::H => self.h_power,
            k => k.claimed_power(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: Vec<Metric>,
}

/// One flattened metric line for tabular output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub criterion: u8,
    pub check: String,
    pub passed: bool,
    pub metric: String,
    pub value: f64,
}

impl Check {
    pub fn rows(&self) -> Vec<CheckRow> {
        self.metrics
            .iter()
            .map(|m| CheckRow {
                criterion: self.id,
                check: self.name.clone(),
                passed: self.passed,
                metric: m.name.clone(),
                value: m.value,
            })
            .collect()
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Default)]
struct Builder {
    metrics: Vec<Metric>,
    failures: Vec<String>,
}

impl Builder {
    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
        });
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self, id: u8, summary: String) -> Check {
        let passed = self.failures.is_empty();
        let detail = if passed {
            summary
        } else {
            format!("{summary}; failed: {}", self.failures.join("; "))
        };
        Check {
            id,
            name: name_of(id).to_string(),
            passed,
            detail,
            metrics: self.metrics,
        }
    }
}

fn name_of(id: u8) -> &'static str {
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or("unknown")
}

fn params(q: u32) -> Result<TreeParams> {
    TreeParams::new(q)
}

fn fmt_eps(e: f64) -> String {
    format!("{e}")
}

/// Run one criterion; evaluation errors turn into a failed check.
pub fn run_check(id: u8, cfg: &VerifyConfig) -> Check {
    let r = match id {
        1 => stochasticity(cfg),
        2 => z_oracle(cfg),
        3 => recurrence(cfg),
        4 => tree_oracle(cfg),
        5 => decay_scaling(cfg),
        6 => horocycle(cfg),
        7 => uniformity(cfg),
        8 => phi_lemma(cfg),
        9 => comparability(cfg),
        10 => block_estimates(cfg),
        11 => spectrum(cfg),
        12 => weak_type(cfg),
        13 => monte_carlo(cfg),
        _ => Err(invalid(format!("no criterion {id}"))),
    };
    r.unwrap_or_else(|e| Check {
        id,
        name: name_of(id).to_string(),
        passed: false,
        detail: format!("error: {e}"),
        metrics: Vec::new(),
    })
}

pub fn run_all(cfg: &VerifyConfig, ids: &[u8]) -> Vec<Check> {
    ids.iter().map(|&id| run_check(id, cfg)).collect()
}

fn stochasticity(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let mut worst = 0.0f64;
    for q in [2, 3, 5] {
        let p = params(q)?;
        for t in [0.5, 1.0, 4.0, 16.0] {
            let m = kernel_mass(t, &p, cfg.tol)?;
            let err = (m.value - 1.0).abs();
            worst = worst.max(err);
            b.require(err <= 1e-8, || format!("q={q} t={t} mass {}", m.value));
        }
    }
    b.metric("max_mass_error", worst);
    Ok(b.finish(1, format!("max |mass - 1| = {worst:.2e}")))
}

fn z_oracle(_cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 5.0, 20.0] {
        let v = z_heat_taylor(t, 100, 50)?;
        for n in -50i64..=50 {
            let want = v[(100 + n) as usize];
            let err = (hz(t, n, 1e-15)? - want).abs() / want;
            worst = worst.max(err);
            b.require(err <= 1e-8, || format!("t={t} n={n} rel {err:.2e}"));
        }
    }
    b.metric("max_relative_error", worst);
    Ok(b.finish(2, format!("max relative error {worst:.2e}")))
}

fn recurrence(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let mut worst = 0.0f64;
    for t in [0.1, 1.0, 10.0, 100.0] {
        for j in 1..=50 {
            let r = hz_recurrence_residual(t, j, cfg.tol * 1e-3)?.abs();
            worst = worst.max(r);
            b.require(r <= 1e-10, || format!("t={t} j={j} residual {r:.2e}"));
        }
    }
    b.metric("max_residual", worst);
    Ok(b.finish(3, format!("max |residual| = {worst:.2e}")))
}

fn tree_oracle(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let r = cfg.kernel_radius;
    let mut worst = 0.0f64;
    let mut loss = 0.0f64;
    for &q in &cfg.qs {
        let p = params(q)?;
        for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let prof = ball_heat_profile(&p, r, t)?;
            let mass: f64 = ball_sphere_mass(&p, r, t)?.iter().sum();
            loss = loss.max(1.0 - mass);
            let jt = JTable::new(t, &p, 8)?;
            for d in 0..=8u32 {
                let err = (prof[d as usize] - jt.j(d)).abs() / jt.j(d);
                worst = worst.max(err);
                b.require(err <= 1e-6, || format!("q={q} t={t} d={d} rel {err:.2e}"));
            }
        }
    }
    b.require(loss <= 1e-8, || format!("boundary loss {loss:.2e}"));
    b.metric("max_relative_error", worst);
    b.metric("boundary_mass_loss", loss);
    Ok(b.finish(
        4,
        format!("radius {r}: max relative error {worst:.2e}, mass lost at boundary {loss:.2e}"),
    ))
}

struct Series {
    q: u32,
    eps: f64,
    kind: KernelKind,
    exponent: f64,
    spread: f64,
}

fn unrestricted_series(cfg: &VerifyConfig, qs: &[u32]) -> Result<Vec<Series>> {
    let rep = sweep(qs, &cfg.ts, &cfg.epsilons, &KernelKind::ALL, false, cfg.tol)?;
    let mut out = Vec::new();
    for chunk in rep.cells.chunks(cfg.ts.len()) {
        let values: Vec<f64> = chunk.iter().map(|c| c.value).collect();
        let fit = fit_decay(&cfg.ts, &values, cfg.power(chunk[0].kind))?;
        out.push(Series {
            q: chunk[0].q,
            eps: chunk[0].epsilon,
            kind: chunk[0].kind,
            exponent: fit.exponent,
            spread: fit.spread,
        });
    }
    Ok(out)
}

fn horocycle_series(cfg: &VerifyConfig, qs: &[u32]) -> Result<(Vec<Series>, Vec<HorocycleSup>)> {
    let mut grid = Vec::new();
    for &q in qs {
        for &eps in &cfg.epsilons {
            for kind in KernelKind::ALL {
                for &t in &cfg.ts {
                    grid.push((q, eps, kind, t));
                }
            }
        }
    }
    let sups: Vec<HorocycleSup> = grid
        .par_iter()
        .map(|&(q, eps, kind, t)| horocycle_sup(t, eps, kind, &params(q)?, cfg.tol))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (g, s) in grid.chunks(cfg.ts.len()).zip(sups.chunks(cfg.ts.len())) {
        let values: Vec<f64> = s.iter().map(|h| h.value).collect();
        let (q, eps, kind, _) = g[0];
        let fit = fit_decay(&cfg.ts, &values, cfg.power(kind) + 0.5)?;
        out.push(Series {
            q,
            eps,
            kind,
            exponent: fit.exponent,
            spread: fit.spread,
        });
    }
    Ok((out, sups))
}

fn series_key(s: &Series) -> String {
    format!("q{}_eps{}_{}", s.q, fmt_eps(s.eps), s.kind.name())
}

fn decay_scaling(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let series = unrestricted_series(cfg, &cfg.qs)?;
    let mut worst_dev = 0.0f64;
    let mut worst_spread = 0.0f64;
    for s in &series {
        let key = series_key(s);
        let claimed = -cfg.power(s.kind);
        let dev = (s.exponent - claimed).abs();
        worst_dev = worst_dev.max(dev);
        worst_spread = worst_spread.max(s.spread);
        b.metric(format!("{key}_exponent"), s.exponent);
        b.metric(format!("{key}_spread"), s.spread);
        b.require(dev <= 0.1, || {
            format!("{key} exponent {:.3} vs {claimed}", s.exponent)
        });
        b.require(s.spread <= 3.0, || format!("{key} spread {:.2}", s.spread));
    }
    Ok(b.finish(
        5,
        format!(
            "{} series, max exponent deviation {worst_dev:.3}, max spread {worst_spread:.2}",
            series.len()
        ),
    ))
}

fn horocycle(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let full = unrestricted_series(cfg, &cfg.qs)?;
    let (horo, sups) = horocycle_series(cfg, &cfg.qs)?;
    let mut worst = 0.0f64;
    for (f, h) in full.iter().zip(&horo) {
        let key = series_key(h);
        let extra = h.exponent - f.exponent;
        worst = worst.max((extra + 0.5).abs());
        b.metric(format!("{key}_exponent"), h.exponent);
        b.metric(format!("{key}_extra"), extra);
        b.require((extra + 0.5).abs() <= 0.1, || {
            format!("{key} extra exponent {extra:.3}")
        });
    }
    let inside = sups
        .iter()
        .filter(|s| s.offset.unsigned_abs() < u64::from(s.window))
        .count();
    b.metric("cells_inside_window", inside as f64);
    b.require(inside == sups.len(), || {
        format!("{} of {} suprema on the window edge", sups.len() - inside, sups.len())
    });
    Ok(b.finish(
        6,
        format!(
            "max |extra + 1/2| = {worst:.3}, {inside}/{} suprema inside the window",
            sups.len()
        ),
    ))
}

fn uniformity(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let mut worst = 0.0f64;
    for horo in [false, true] {
        for &eps in &cfg.epsilons {
            for kind in KernelKind::ALL {
                let u = q_uniformity(kind, eps, horo, &cfg.ts, &cfg.uniformity_qs, cfg.tol)?;
                let key = format!(
                    "{}_eps{}_{}",
                    if horo { "horocycle" } else { "full" },
                    fmt_eps(eps),
                    kind.name()
                );
                worst = worst.max(u.spread);
                b.metric(format!("{key}_spread"), u.spread);
                b.require(u.spread <= 4.0, || format!("{key} spread {:.2}", u.spread));
            }
        }
    }
    Ok(b.finish(7, format!("max spread across q = {worst:.2}")))
}

fn phi_lemma(_cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let grid = log_grid(1e-4, 1e4, 400);
    let c0 = phi_decay_constant(&grid, 1.0)?;
    let mut min_gap = f64::INFINITY;
    for &x in &grid {
        let f = phi(x)?;
        let gap = x.ln() + 1.0 - std::f64::consts::LN_2 - f;
        min_gap = min_gap.min(gap);
        b.require(gap >= 0.0, || format!("log bound fails at x={x:.3e}"));
        if x >= 1.0 {
            b.require(f <= -c0 / x, || format!("decay bound fails at x={x:.3e}"));
        }
    }
    b.require(c0 > 0.0, || format!("C0 = {c0}"));
    b.metric("c0", c0);
    b.metric("min_log_gap", min_gap);
    Ok(b.finish(8, format!("C0 = {c0:.6} at x0 = 1, min log-bound gap {min_gap:.2e}")))
}

fn comparability(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let ts = log_grid(0.5, 1e3, 30);
    let mut grid = Vec::new();
    for q in 2..=7u32 {
        for &t in &ts {
            grid.push((q, t));
        }
    }
    let brackets: Vec<(u32, f64, f64)> = grid
        .par_iter()
        .map(|&(q, t)| {
            let p = params(q)?;
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for d in 0..=60 {
                let j = j_certified(t, d, &p, cfg.tol)?;
                let r = j.value / j.first_term;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Ok((q, lo, hi))
        })
        .collect::<Result<_>>()?;
    let lo = brackets.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
    let hi = brackets.iter().map(|b| b.2).fold(0.0, f64::max);
    for q in 2..=7u32 {
        let h = brackets.iter().filter(|b| b.0 == q).map(|b| b.2).fold(0.0, f64::max);
        b.metric(format!("q{q}_max_ratio"), h);
    }
    b.metric("min_ratio", lo);
    b.metric("max_ratio", hi);
    b.require(lo >= 1.0 && hi <= 6.0, || format!("ratio range [{lo}, {hi}]"));
    Ok(b.finish(9, format!("ratio range [{lo:.4}, {hi:.4}]")))
}

/// `count` pairs `(y, z)` with `1 <= d(y, z) <= 5`, reached by non-backtracking
/// walks from a random deep vertex.
pub fn random_pairs(p: &TreeParams, count: usize, seed: u64) -> Vec<(VertexWord, VertexWord)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let word: Vec<u8> = (0..24).map(|_| rng.gen_range(0..p.q() as u8)).collect();
            let y = VertexWord::new(0, word);
            let steps = rng.gen_range(1..=5);
            let mut prev: Option<VertexWord> = None;
            let mut z = y.clone();
            for _ in 0..steps {
                let options: Vec<VertexWord> = z
                    .neighbours(p)
                    .into_iter()
                    .filter(|v| Some(v) != prev.as_ref())
                    .collect();
                let next = options[rng.gen_range(0..options.len())].clone();
                prev = Some(std::mem::replace(&mut z, next));
            }
            (y, z)
        })
        .collect()
}

fn block_estimates(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let ns: Vec<u32> = (0..=cfg.n_max).collect();
    for &q in &cfg.qs {
        let p = params(q)?;
        for &eps in &cfg.epsilons {
            for (form, label) in [(BlockWeight::Exp, "exp"), (BlockWeight::Poly, "poly")] {
                if form == BlockWeight::Poly && eps != cfg.epsilons[0] {
                    continue;
                }
                let vals: Vec<f64> = ns
                    .par_iter()
                    .map(|&n| {
                        let r = kn_weighted_sum(n, eps, form, &p, cfg.tol)?;
                        Ok(r.value + r.error)
                    })
                    .collect::<Result<_>>()?;
                let hi = vals.iter().copied().fold(0.0, f64::max);
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let key = if form == BlockWeight::Poly {
                    format!("q{q}_{label}")
                } else {
                    format!("q{q}_{label}_eps{}", fmt_eps(eps))
                };
                b.metric(format!("{key}_max"), hi);
                b.metric(format!("{key}_spread"), hi / lo);
                b.require(hi / lo <= 3.0, || format!("{key} spread {:.2}", hi / lo));
            }
            let fit_ns: Vec<u32> = (2..=cfg.n_max).collect();
            let vals: Vec<f64> = fit_ns
                .par_iter()
                .map(|&n| {
                    let g = kn_grad_sum(n, eps, &p, cfg.tol)?;
                    Ok(g.value + g.tail_bound)
                })
                .collect::<Result<_>>()?;
            let scales: Vec<f64> = fit_ns.iter().map(|&n| 2f64.powi(n as i32)).collect();
            let fit = fit_decay(&scales, &vals, 0.5)?;
            let key = format!("q{q}_grad_eps{}", fmt_eps(eps));
            b.metric(format!("{key}_exponent"), fit.exponent);
            b.require((-0.6..=-0.4).contains(&fit.exponent), || {
                format!("{key} exponent {:.3}", fit.exponent)
            });
        }
    }
    let mut passed = 0usize;
    let mut worst_ratio = 0.0f64;
    let per_q = cfg.lipschitz_pairs.div_ceil(cfg.qs.len());
    let mut jobs = Vec::new();
    for (qi, &q) in cfg.qs.iter().enumerate() {
        let p = params(q)?;
        for (i, pair) in random_pairs(&p, per_q, cfg.seed + qi as u64).into_iter().enumerate() {
            if jobs.len() < cfg.lipschitz_pairs {
                jobs.push((p, i as u32 % (cfg.n_max + 1), pair));
            }
        }
    }
    let checks = jobs
        .par_iter()
        .map(|(p, n, (y, z))| lipschitz_check(*n, y, z, p, cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    for c in &checks {
        worst_ratio = worst_ratio.max(c.lhs / c.bound);
        if c.passes(cfg.tol) {
            passed += 1;
        }
    }
    b.metric("lipschitz_pairs", checks.len() as f64);
    b.metric("lipschitz_passed", passed as f64);
    b.metric("lipschitz_max_ratio", worst_ratio);
    b.require(passed == checks.len(), || {
        format!("{} Lipschitz pairs fail", checks.len() - passed)
    });
    Ok(b.finish(
        10,
        format!(
            "block sums bounded, gradient decay fitted, {passed}/{} Lipschitz pairs pass (max lhs/bound {worst_ratio:.3})",
            checks.len()
        ),
    ))
}

fn spectrum(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let mut notes = Vec::new();
    for &q in &cfg.qs {
        let p = params(q)?;
        let s = spectrum_summary(&p, cfg.spectrum_radius);
        b.metric(format!("q{q}_flow_min"), s.flow_min);
        b.metric(format!("q{q}_flow_max"), s.flow_max);
        b.require(s.flow_min >= -1e-9 && s.flow_max <= 2.0 + 1e-9, || {
            format!("q={q} spectrum [{}, {}]", s.flow_min, s.flow_max)
        });
        let mins: Vec<f64> = [6, 8, 10, 12]
            .iter()
            .map(|&r| spectrum_summary(&p, r).combinatorial_min)
            .collect();
        for (r, m) in [6, 8, 10, 12].iter().zip(&mins) {
            b.metric(format!("q{q}_delta_min_r{r}"), *m);
        }
        b.require(mins.windows(2).all(|w| w[1] < w[0]), || {
            format!("q={q} bottom not decreasing")
        });
        b.require(mins.iter().all(|&m| m > p.b()), || format!("q={q} bottom below b"));
        notes.push(format!("q={q} gap to b {:.3e}", mins[3] - p.b()));
    }
    Ok(b.finish(11, notes.join(", ")))
}

fn weak_type(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let lambdas = default_lambda_grid();
    let mut by_q = Vec::new();
    for &q in &cfg.qs {
        let p = params(q)?;
        let kernel = RieszKernel::new(&p, 25, cfg.tol)?;
        let sups: Vec<f64> = [15, 20, 25]
            .iter()
            .map(|&r| weak11_probe(&kernel, &p, &lambdas, r).map(|w| w.sup))
            .collect::<Result<_>>()?;
        let hi = sups.iter().copied().fold(0.0, f64::max);
        let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
        for (r, s) in [15, 20, 25].iter().zip(&sups) {
            b.metric(format!("q{q}_sup_r{r}"), *s);
        }
        b.require(hi.is_finite() && hi / lo <= 2.0, || {
            format!("q={q} radius ratio {:.3}", hi / lo)
        });
        by_q.push(hi);
    }
    let hi = by_q.iter().copied().fold(0.0, f64::max);
    Ok(b.finish(12, format!("max lambda-level mass {hi:.4} over radii 15, 20, 25")))
}

fn monte_carlo(cfg: &VerifyConfig) -> Result<Check> {
    let mut b = Builder::default();
    let p = params(2)?;
    let t = 4.0;
    let start = VertexWord::new(0, vec![0; 64]);
    let walk = WalkConfig {
        q: 2,
        start: start.clone(),
        t,
        replicates: cfg.replicates,
        seed: cfg.seed,
    };
    let targets = default_targets(&start)?;
    let rep = mc_heat(&walk, &targets)?;
    let mut worst = 0.0f64;
    for tg in &rep.targets {
        let q = KernelQuery::from_pair(t, &start, &tg.vertex)?;
        let want = heat_kernel(&q, &p)? * p.pow(tg.vertex.level() as f64);
        let z = (tg.estimate - want) / tg.std_error;
        worst = worst.max(z.abs());
        b.metric(format!("z_{}", tg.vertex), z);
        b.require(z.abs() <= 4.0, || format!("{} off by {z:.2} sigma", tg.vertex));
    }
    let dz = rep.drift_mean / rep.drift_std_error;
    b.metric("drift_z", dz);
    b.require(dz.abs() <= 4.0, || format!("level drift {dz:.2} sigma"));
    Ok(b.finish(
        13,
        format!(
            "N = {}, max |z| = {worst:.2} over {} targets, drift z = {dz:.2}",
            cfg.replicates,
            rep.targets.len()
        ),
    ))
}

//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::estimates::{fit_decay, sweep};
use crate::oracle::{default_targets, flow_spectrum, mc_heat, spectrum_summary, combinatorial_spectrum, WalkConfig};
use crate::report::{write_report, Format, RunHeader};
use crate::riesz::{kn_grad_sum, kn_weighted_sum, BlockWeight, RieszKernel, RieszQuery};
use crate::tree::{RelPos, TreeParams, VertexWord};
use crate::treeheat::{heat_kernel, j_certified, reduced_profile, KernelKind, KernelQuery};
use crate::verify::{run_all, VerifyConfig, CRITERIA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "flowtree", version, about = "Flow heat kernel and Riesz transform on homogeneous trees")]
pub struct Cli {
    /// Worker threads (defaults to all cores)
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output format: csv or json
    #[arg(long, global = true, default_value = "csv")]
    pub format: String,

    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Kernel values over a grid of (t, d, s, rel)
    Kernel(KernelArgs),
    /// Run the acceptance checks
    Verify(VerifyArgs),
    /// Spectral bounds of truncated balls
    Spectrum(SpectrumArgs),
    /// Monte Carlo walk against the analytic kernel
    Walk(WalkArgs),
    /// Weighted L1 sums over (q, t, epsilon, kind)
    Sweep(SweepArgs),
    /// Block sums of the Riesz kernel decomposition
    Riesz(RieszArgs),
}

#[derive(Args, Debug)]
pub struct KernelArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub d: Vec<u32>,
    /// Sum of levels l(x) + l(y)
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub s: Vec<i64>,
    /// Relations of x to y; defaults to the one forced by d when unambiguous
    #[arg(long, value_delimiter = ',')]
    pub rel: Vec<String>,
    /// Any of H, gradX, gradY, gradXY, R
    #[arg(long, value_delimiter = ',', default_value = "H")]
    pub kinds: Vec<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Criteria to run (all by default)
    #[arg(long, value_delimiter = ',')]
    pub criteria: Vec<u8>,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub q: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,7")]
    pub uniformity_q: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256,1024,4096")]
    pub t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 12)]
    pub n_max: u32,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 25)]
    pub ball_radius: u32,
    #[arg(long, default_value_t = 10)]
    pub spectrum_radius: u32,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub replicates: u64,
    /// Decay power claimed for the heat kernel sum (0 is correct)
    #[arg(long, default_value_t = 0.0)]
    pub h_power: f64,
    /// key=value file supplying defaults for the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub q: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "6,8,10,12")]
    pub radius: Vec<u32>,
    /// List every eigenvalue with its multiplicity
    #[arg(long)]
    pub eigenvalues: bool,
}

#[derive(Args, Debug)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 4.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 20240601)]
    pub seed: u64,
    /// Depth of the start vertex below the truncation apex
    #[arg(long, default_value_t = 64)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub q: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256,1024,4096")]
    pub t: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "H,gradX,gradY,gradXY")]
    pub kinds: Vec<String>,
    /// Report the supremum over horocycles instead of the full sum
    #[arg(long)]
    pub horocycle: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// key=value file supplying defaults for the flags above
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RieszArgs {
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, default_value_t = 0)]
    pub n_min: u32,
    #[arg(long, default_value_t = 12)]
    pub n_max: u32,
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

/// Outcome of a command: its report was written and the checks it ran
/// passed or not.
pub struct Outcome {
    pub passed: bool,
    pub messages: Vec<String>,
}

fn parse_list<T: std::str::FromStr<Err = Error>>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| s.trim().parse()).collect()
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(invalid(format!("{name} grid is empty")));
    }
    Ok(())
}

fn positive_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// Read `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_key_values(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.push((k.trim().replace('_', "-"), v.trim().to_string()));
    }
    Ok(out)
}

/// Splice a `--config` file into the argument list: each key becomes a flag
/// unless the same flag is already given explicitly.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(pos) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let (path, skip) = match strs[pos].split_once('=') {
        Some((_, p)) => (p.to_string(), 1),
        None => (
            strs.get(pos + 1)
                .cloned()
                .ok_or_else(|| invalid("--config needs a path"))?,
            2,
        ),
    };
    let given = |key: &str| {
        let flag = format!("--{key}");
        strs.iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")))
    };
    let mut out: Vec<OsString> = args[..pos].to_vec();
    for (k, v) in read_key_values(Path::new(&path))? {
        if given(&k) {
            continue;
        }
        if v == "true" {
            out.push(format!("--{k}").into());
        } else if v != "false" {
            out.push(format!("--{k}={v}").into());
        }
    }
    out.extend_from_slice(&args[pos + skip..]);
    Ok(out)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("flowtree: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("flowtree: --workers must be positive");
            return EXIT_USAGE;
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let format: Format = match cli.format.parse() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("flowtree: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.output {
        Some(path) => File::create(path)
            .map_err(Error::from)
            .and_then(|f| run(&cli.command, format, BufWriter::new(f))),
        None => run(&cli.command, format, std::io::stdout().lock()),
    };
    match result {
        Ok(outcome) => {
            for m in &outcome.messages {
                eprintln!("{m}");
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e @ (Error::InvalidParameter(_) | Error::InvalidQuery(_) | Error::MismatchedApex(..))) => {
            eprintln!("flowtree: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("flowtree: {e}");
            EXIT_FAIL
        }
    }
}

pub fn run<W: Write>(cmd: &Command, format: Format, out: W) -> Result<Outcome> {
    match cmd {
        Command::Kernel(a) => cmd_kernel(a, format, out),
        Command::Verify(a) => cmd_verify(a, format, out),
        Command::Spectrum(a) => cmd_spectrum(a, format, out),
        Command::Walk(a) => cmd_walk(a, format, out),
        Command::Sweep(a) => cmd_sweep(a, format, out),
        Command::Riesz(a) => cmd_riesz(a, format, out),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub q: u32,
    pub t: f64,
    pub d: u32,
    pub s: i64,
    pub rel: String,
    pub kind: String,
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Serialize)]
struct CountSummary {
    rows: usize,
}

fn default_rel(d: u32) -> Result<RelPos> {
    match d {
        0 => Ok(RelPos::Equal),
        _ => Err(invalid(format!(
            "distance {d} needs an explicit --rel (ancestor, descendant or incomparable)"
        ))),
    }
}

/// `H`, a gradient, or the Riesz kernel `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum EntryKind {
    Heat(KernelKind),
    Riesz,
}

fn parse_entry_kind(s: &str) -> Result<EntryKind> {
    if s.eq_ignore_ascii_case("r") || s.eq_ignore_ascii_case("riesz") {
        Ok(EntryKind::Riesz)
    } else {
        Ok(EntryKind::Heat(s.parse()?))
    }
}

fn heat_entry(kind: KernelKind, q: &KernelQuery, p: &TreeParams, tol: f64) -> Result<(f64, f64)> {
    let top = q.d + 1;
    let mut jr = Vec::with_capacity(top as usize + 1);
    let mut err = 0.0;
    for k in 0..=top {
        let j = j_certified(q.t, k, p, tol)?;
        let up = p.pow(0.5 * f64::from(k));
        jr.push(j.value * up);
        err += 2.0 * j.tail_bound * up;
    }
    let scale = p.pow(-0.5 * (q.s as f64 + f64::from(q.d)));
    let r = reduced_profile(&jr, 1.0 / p.qf(), kind, q.d, q.rel);
    Ok((scale * r, scale * err))
}

pub fn cmd_kernel<W: Write>(a: &KernelArgs, format: Format, out: W) -> Result<Outcome> {
    let p = TreeParams::new(a.q)?;
    positive_tol(a.tol)?;
    nonempty("t", &a.t)?;
    nonempty("d", &a.d)?;
    nonempty("s", &a.s)?;
    let kinds: Vec<EntryKind> = a.kinds.iter().map(|s| parse_entry_kind(s)).collect::<Result<_>>()?;
    nonempty("kind", &kinds)?;
    let rels: Vec<Option<RelPos>> = if a.rel.is_empty() {
        vec![None]
    } else {
        parse_list::<RelPos>(&a.rel)?.into_iter().map(Some).collect()
    };
    let d_max = a.d.iter().copied().max().unwrap_or(0);
    let riesz = if kinds.contains(&EntryKind::Riesz) {
        Some(RieszKernel::new(&p, d_max + 2, a.tol)?)
    } else {
        None
    };
    let mut rows = Vec::new();
    for &t in &a.t {
        for &d in &a.d {
            for &s in &a.s {
                for rel in &rels {
                    let rel = match rel {
                        Some(r) => *r,
                        None => default_rel(d)?,
                    };
                    let query = KernelQuery::new(t, d, s, rel)?;
                    for &kind in &kinds {
                        let (value, error_bound) = match kind {
                            EntryKind::Heat(k) => heat_entry(k, &query, &p, a.tol)?,
                            EntryKind::Riesz => {
                                let rk = riesz.as_ref().expect("built above");
                                let rq = RieszQuery::new(d, s, rel)?;
                                let v = rk.kernel(&rq)?;
                                let scale = p.pow(-0.5 * (s as f64 + f64::from(d)));
                                (v, 4.0 * rk.error * scale)
                            }
                        };
                        rows.push(KernelRow {
                            q: a.q,
                            t,
                            d,
                            s,
                            rel: rel.name().to_string(),
                            kind: match kind {
                                EntryKind::Heat(k) => k.name().to_string(),
                                EntryKind::Riesz => "R".to_string(),
                            },
                            value,
                            error_bound,
                        });
                    }
                }
            }
        }
    }
    let mut h = RunHeader::new("kernel");
    h.push("q", a.q)
        .list("t", &a.t)
        .list("d", &a.d)
        .list("s", &a.s)
        .list("rel", &a.rel)
        .list("kinds", &a.kinds)
        .push("tol", a.tol);
    write_report(out, format, &h, &rows, &CountSummary { rows: rows.len() })?;
    Ok(Outcome {
        passed: true,
        messages: Vec::new(),
    })
}

pub fn verify_config(a: &VerifyArgs) -> VerifyConfig {
    VerifyConfig {
        qs: a.q.clone(),
        uniformity_qs: a.uniformity_q.clone(),
        ts: a.t.clone(),
        epsilons: a.eps.clone(),
        n_max: a.n_max,
        tol: a.tol,
        kernel_radius: a.ball_radius,
        spectrum_radius: a.spectrum_radius,
        seed: a.seed,
        replicates: a.replicates,
        lipschitz_pairs: 50,
        h_power: a.h_power,
    }
}

#[derive(Serialize)]
struct VerifySummary {
    passed: bool,
    checks: Vec<CheckSummary>,
}

#[derive(Serialize)]
struct CheckSummary {
    id: u8,
    name: String,
    passed: bool,
    detail: String,
}

pub fn cmd_verify<W: Write>(a: &VerifyArgs, format: Format, out: W) -> Result<Outcome> {
    let cfg = verify_config(a);
    cfg.validate()?;
    let ids: Vec<u8> = if a.criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.criteria.clone()
    };
    if let Some(bad) = ids.iter().find(|&&i| !CRITERIA.iter().any(|c| c.0 == i)) {
        return Err(invalid(format!("no criterion {bad}")));
    }
    let checks = run_all(&cfg, &ids);
    let rows: Vec<_> = checks.iter().flat_map(|c| c.rows()).collect();
    let mut h = RunHeader::new("verify");
    h.list("criteria", &ids)
        .list("q", &cfg.qs)
        .list("uniformity_q", &cfg.uniformity_qs)
        .list("t", &cfg.ts)
        .list("eps", &cfg.epsilons)
        .push("n_max", cfg.n_max)
        .push("tol", cfg.tol)
        .push("ball_radius", cfg.kernel_radius)
        .push("spectrum_radius", cfg.spectrum_radius)
        .push("seed", cfg.seed)
        .push("replicates", cfg.replicates)
        .push("h_power", cfg.h_power);
    let passed = checks.iter().all(|c| c.passed);
    let summary = VerifySummary {
        passed,
        checks: checks
            .iter()
            .map(|c| CheckSummary {
                id: c.id,
                name: c.name.clone(),
                passed: c.passed,
                detail: c.detail.clone(),
            })
            .collect(),
    };
    write_report(out, format, &h, &rows, &summary)?;
    Ok(Outcome {
        passed,
        messages: checks.iter().map(|c| c.line()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub q: u32,
    pub radius: u32,
    pub operator: String,
    pub value: f64,
    pub multiplicity: f64,
}

pub fn cmd_spectrum<W: Write>(a: &SpectrumArgs, format: Format, out: W) -> Result<Outcome> {
    nonempty("q", &a.q)?;
    nonempty("radius", &a.radius)?;
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut messages = Vec::new();
    let mut passed = true;
    for &q in &a.q {
        let p = TreeParams::new(q)?;
        for &r in &a.radius {
            if r == 0 {
                return Err(invalid("radius must be positive"));
            }
            let s = spectrum_summary(&p, r);
            if !(s.flow_min >= -1e-9 && s.flow_max <= 2.0 + 1e-9 && s.combinatorial_min > s.bottom) {
                passed = false;
                messages.push(format!("q={q} radius {r}: spectrum out of bounds"));
            }
            if a.eigenvalues {
                for (op, spec) in [("flow", flow_spectrum(&p, r)), ("combinatorial", combinatorial_spectrum(&p, r))] {
                    rows.extend(spec.into_iter().map(|e| SpectrumRow {
                        q,
                        radius: r,
                        operator: op.to_string(),
                        value: e.value,
                        multiplicity: e.multiplicity,
                    }));
                }
            } else {
                rows.extend([
                    ("flow_min", s.flow_min),
                    ("flow_max", s.flow_max),
                    ("combinatorial_min", s.combinatorial_min),
                ]
                .map(|(op, value)| SpectrumRow {
                    q,
                    radius: r,
                    operator: op.to_string(),
                    value,
                    multiplicity: 1.0,
                }));
            }
            summaries.push(s);
        }
    }
    let mut h = RunHeader::new("spectrum");
    h.list("q", &a.q).list("radius", &a.radius).push("eigenvalues", a.eigenvalues);
    write_report(out, format, &h, &rows, &summaries)?;
    Ok(Outcome { passed, messages })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkRow {
    pub vertex: String,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub z_score: f64,
}

#[derive(Serialize)]
struct WalkSummary {
    drift_mean: f64,
    drift_std_error: f64,
    mean_jumps: f64,
    passed: bool,
}

pub fn cmd_walk<W: Write>(a: &WalkArgs, format: Format, out: W) -> Result<Outcome> {
    let p = TreeParams::new(a.q)?;
    if a.depth < 2 {
        return Err(invalid("start depth must be at least 2"));
    }
    let start = VertexWord::new(0, vec![0; a.depth]);
    let cfg = WalkConfig {
        q: a.q,
        start: start.clone(),
        t: a.t,
        replicates: a.replicates,
        seed: a.seed,
    };
    let targets = default_targets(&start)?;
    let rep = mc_heat(&cfg, &targets)?;
    let mut rows = Vec::new();
    let mut passed = true;
    for tg in &rep.targets {
        let analytic = if a.t == 0.0 {
            if tg.vertex == start {
                1.0
            } else {
                0.0
            }
        } else {
            let q = KernelQuery::from_pair(a.t, &start, &tg.vertex)?;
            heat_kernel(&q, &p)? * p.pow(tg.vertex.level() as f64)
        };
        let diff = tg.estimate - analytic;
        let z = if tg.std_error > 0.0 {
            diff / tg.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        passed &= z.abs() <= 4.0;
        rows.push(WalkRow {
            vertex: tg.vertex.to_string(),
            hits: tg.hits,
            estimate: tg.estimate,
            std_error: tg.std_error,
            analytic,
            z_score: z,
        });
    }
    let mut h = RunHeader::new("walk");
    h.push("q", a.q)
        .push("t", a.t)
        .push("replicates", a.replicates)
        .push("seed", a.seed)
        .push("start", &start);
    let summary = WalkSummary {
        drift_mean: rep.drift_mean,
        drift_std_error: rep.drift_std_error,
        mean_jumps: rep.mean_jumps,
        passed,
    };
    write_report(out, format, &h, &rows, &summary)?;
    Ok(Outcome {
        passed,
        messages: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub q: u32,
    pub t: f64,
    pub epsilon: f64,
    pub kind: String,
    pub restriction: String,
    pub value: f64,
    pub tail_bound: f64,
    pub value_times_power: f64,
}

pub fn cmd_sweep<W: Write>(a: &SweepArgs, format: Format, out: W) -> Result<Outcome> {
    nonempty("q", &a.q)?;
    nonempty("t", &a.t)?;
    nonempty("eps", &a.eps)?;
    positive_tol(a.tol)?;
    let kinds: Vec<KernelKind> = parse_list(&a.kinds)?;
    nonempty("kind", &kinds)?;
    let rep = sweep(&a.q, &a.t, &a.eps, &kinds, a.horocycle, a.tol)?;
    let rows: Vec<SweepRow> = rep
        .cells
        .iter()
        .map(|c| SweepRow {
            q: c.q,
            t: c.t,
            epsilon: c.epsilon,
            kind: c.kind.name().to_string(),
            restriction: c.restriction.clone(),
            value: c.value,
            tail_bound: c.tail_bound,
            value_times_power: c.value_times_power,
        })
        .collect();
    let mut h = RunHeader::new("sweep");
    h.list("q", &a.q)
        .list("t", &a.t)
        .list("eps", &a.eps)
        .list("kinds", &a.kinds)
        .push("horocycle", a.horocycle)
        .push("tol", a.tol);
    write_report(out, format, &h, &rows, &rep.fits)?;
    Ok(Outcome {
        passed: true,
        messages: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RieszRow {
    pub n: u32,
    pub epsilon: f64,
    pub sum_kind: String,
    pub value: f64,
    pub fitted_exponent: f64,
    pub error_bound: f64,
}

pub fn cmd_riesz<W: Write>(a: &RieszArgs, format: Format, out: W) -> Result<Outcome> {
    use rayon::prelude::*;
    let p = TreeParams::new(a.q)?;
    positive_tol(a.tol)?;
    nonempty("eps", &a.eps)?;
    if a.n_min > a.n_max {
        return Err(invalid("empty n range"));
    }
    let ns: Vec<u32> = (a.n_min..=a.n_max).collect();
    let mut rows = Vec::new();
    for &eps in &a.eps {
        for (label, form) in [("weighted_exp", Some(BlockWeight::Exp)), ("weighted_poly", Some(BlockWeight::Poly)), ("grad", None)] {
            let vals: Vec<(f64, f64)> = ns
                .par_iter()
                .map(|&n| match form {
                    Some(f) => kn_weighted_sum(n, eps, f, &p, a.tol).map(|r| (r.value, r.error)),
                    None => kn_grad_sum(n, eps, &p, a.tol).map(|r| (r.value, r.tail_bound)),
                })
                .collect::<Result<_>>()?;
            // the gradient decay is fitted from n = 2 on
            let first = if form.is_none() { 2 } else { 0 };
            let fit: Vec<(f64, f64)> = ns
                .iter()
                .zip(&vals)
                .filter(|(&n, _)| n >= first)
                .map(|(&n, v)| (2f64.powi(n as i32), v.0 + v.1))
                .collect();
            let exponent = if fit.len() >= 4 {
                let (scales, v): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
                fit_decay(&scales, &v, 0.0)?.exponent
            } else {
                f64::NAN
            };
            for (&n, &(value, error_bound)) in ns.iter().zip(&vals) {
                rows.push(RieszRow {
                    n,
                    epsilon: eps,
                    sum_kind: label.to_string(),
                    value,
                    fitted_exponent: exponent,
                    error_bound,
                });
            }
        }
    }
    let mut h = RunHeader::new("riesz");
    h.push("q", a.q)
        .push("n_min", a.n_min)
        .push("n_max", a.n_max)
        .list("eps", &a.eps)
        .push("tol", a.tol);
    write_report(out, format, &h, &rows, &CountSummary { rows: rows.len() })?;
    Ok(Outcome {
        passed: true,
        messages: Vec::new(),
    })
}

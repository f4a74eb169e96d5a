use crate::error::{invalid, Error, Result};

/// `e^{tB} v` for an operator `B` with nonnegative entries, by its Taylor
/// series. Every term is nonnegative, so entries keep full relative accuracy
/// however small they are. `norm` must bound the max-row-sum norm of `B`;
/// summation stops once the remaining terms are below `rel` times the
/// smallest entry among `watch`.
pub fn expm_positive<F>(
    apply: F,
    v: &[f64],
    t: f64,
    norm: f64,
    watch: std::ops::Range<usize>,
    rel: f64,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(t >= 0.0 && norm >= 0.0) {
        return Err(invalid("expm_positive needs t >= 0 and a nonnegative norm"));
    }
    if v.iter().any(|&x| x < 0.0) {
        return Err(invalid("expm_positive needs a nonnegative vector"));
    }
    let v_norm = v.iter().copied().fold(0.0, f64::max);
    let mut acc = v.to_vec();
    let mut term = v.to_vec();
    let tb = t * norm;
    // log of (tb)^k / k! for the running bound on the k-th term
    let mut ln_bound = 0.0f64;
    for k in 1..100_000usize {
        term = apply(&term);
        let c = t / k as f64;
        term.iter_mut().for_each(|x| *x *= c);
        for (a, x) in acc.iter_mut().zip(&term) {
            *a += x;
        }
        ln_bound += tb.ln() - (k as f64).ln();
        let r = tb / (k + 1) as f64;
        if r < 0.5 {
            let tail = (ln_bound).exp() * v_norm * r / (1.0 - r);
            let floor = acc[watch.clone()].iter().copied().fold(f64::INFINITY, f64::min);
            if floor > 0.0 && tail <= rel * floor {
                return Ok(acc);
            }
            if tb == 0.0 {
                return Ok(acc);
            }
        }
    }
    Err(Error::Numerical("Taylor series for exp did not converge".into()))
}

//! Small numerical helpers shared across modules.

use std::f64::consts::PI;

/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[allow(clippy::excessive_precision)]
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.08106146679532725821967,
    0.04134069595540929409382,
    0.02767792568499833914879,
    0.02079067210376509311152,
    0.01664469118982119216319,
    0.01387612882307074799875,
    0.01189670994589177009506,
    0.01041126526197209649748,
    0.009255462182712732917729,
    0.008330563433362871256469,
    0.007573675487951840794972,
    0.006942840107209529865664,
    0.00640899418800420706844,
    0.005951370112758847735624,
    0.005554733551962801371039,
];

/// `ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi)` for integer `n`.
pub fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n < 16 {
        return STIRLERR_SMALL[n as usize];
    }
    let nf = n as f64;
    let nn = nf * nf;
    if n > 500 {
        (S0 - S1 / nn) / nf
    } else if n > 80 {
        (S0 - (S1 - S2 / nn) / nn) / nf
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / nf
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance term `x ln(x / m) + m - x`, accurate when `x` is close to `m`.
pub fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln(e^{-t} t^m / m!)` with full relative accuracy.
pub fn ln_poisson_pmf(m: u64, t: f64) -> f64 {
    if m == 0 {
        return -t;
    }
    let mf = m as f64;
    -stirlerr(m) - bd0(mf, t) - 0.5 * (2.0 * PI * mf).ln()
}

/// `ln(C(m, a) 2^{-m})`.
pub fn ln_binomial_half(a: u64, m: u64) -> f64 {
    debug_assert!(a <= m);
    if a == 0 || a == m {
        return -(m as f64) * std::f64::consts::LN_2;
    }
    let (af, mf) = (a as f64, m as f64);
    let half = 0.5 * mf;
    let lc = stirlerr(m) - stirlerr(a) - stirlerr(m - a) - bd0(af, half) - bd0(mf - af, half);
    let lf = (2.0 * PI).ln() + af.ln() + (-af / mf).ln_1p();
    lc - 0.5 * lf
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    stirlerr(n) + (nf + 0.5) * nf.ln() - nf + 0.5 * (2.0 * PI).ln()
}

/// Natural log of `sum exp(xs)`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: CompensatedSum = xs.iter().map(|&x| (x - m).exp()).collect();
    m + s.value().ln()
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

//! Shared numeric kernels: entropy, divergence, the Gaussian tail, binomial
//! sums (exact and log-domain), Gaussian expectations and bisection.

use std::f64::consts::{LN_2, SQRT_2};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

/// Exact probabilities and costs. Always kept in lowest terms with a
/// positive denominator by `num_rational`.
pub type ExactRational = BigRational;

/// Half-width of the integration window used by [`gaussian_expectation`].
/// The Gaussian mass outside `[-12, 12]` is `2 Q(12) < 4e-33`.
pub const GAUSSIAN_TRUNCATION: f64 = 12.0;

const MAX_SUBDIVISIONS: usize = 4000;

/// A probability stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("probability {p} outside [0, 1]"));
        }
        Ok(LogProb(p.ln()))
    }

    /// Wraps a log value; `value` must be `<= 0`.
    pub fn from_ln(value: f64) -> Self {
        debug_assert!(value <= 1e-12, "log-probability {value} > 0");
        LogProb(value.min(0.0))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

impl std::ops::Mul for LogProb {
    type Output = LogProb;

    // Products of probabilities are sums of logarithms.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: LogProb) -> LogProb {
        LogProb(self.0 + rhs.0)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().total()
}

fn neg_xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Binary entropy in bits, with `binent(0) = binent(1) = 0`.
pub fn binent(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("binent argument {p} outside [0, 1]"));
    }
    Ok(binent_clamped(p))
}

/// [`binent`] without the domain check; arguments are clamped to `[0, 1]`.
///
/// The larger of `p` and `1 - p` is always the one taken as given, so
/// `binent(p)` and `binent(1 - p)` are bit-identical.
pub(crate) fn binent_clamped(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let hi = if p >= 0.5 { p } else { 1.0 - p };
    let lo = 1.0 - hi;
    neg_xlog2x(lo) + neg_xlog2x(hi)
}

/// Binary divergence `D(a || b)` in bits.
pub fn bindiv(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return domain(format!("bindiv arguments ({a}, {b}) outside [0, 1]"));
    }
    if b == 0.0 || b == 1.0 {
        return if a == b { Ok(0.0) } else { domain(format!("D({a} || {b}) is infinite")) };
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).log2() };
    Ok(term(a, b) + term(1.0 - a, 1.0 - b))
}

/// Standard normal tail `P[G > t]`.
pub fn q_function(t: f64) -> f64 {
    0.5 * libm::erfc(t / SQRT_2)
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// `C(n, k) / 2^n` as a log-probability.
pub fn binomial_pmf_half(n: u64, k: u64) -> LogProb {
    LogProb::from_ln(ln_binomial(n, k) - n as f64 * LN_2)
}

/// `sum_{m = k0}^{n} C(n, m)`, exactly. `k0 = n + 1` gives zero.
pub fn binom_tail(n: u64, k0: u64) -> BigUint {
    let mut total = BigUint::zero();
    if k0 > n {
        return total;
    }
    let mut c = binomial(n, k0);
    for m in k0..=n {
        total += &c;
        c = c * (n - m) / (m + 1);
    }
    total
}

/// Natural log of [`binom_tail`], by a max-shifted compensated sum of the
/// terms. Returns `-inf` for an empty range.
pub fn ln_binom_tail(n: u64, k0: u64) -> f64 {
    if k0 > n {
        return f64::NEG_INFINITY;
    }
    // The largest term sits at the mode or at k0 when k0 is past it.
    let peak = ln_binomial(n, (n / 2).max(k0));
    let sum = kahan_sum((k0..=n).map(|m| (ln_binomial(n, m) - peak).exp()));
    peak + sum.ln()
}

/// Converts an exact rational to the nearest double.
pub fn to_f64(r: &ExactRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Renders `r` rounded (half away from zero) to `decimals` places.
pub fn format_decimals(r: &ExactRational, decimals: u32) -> String {
    use num_bigint::BigInt;
    use num_traits::Signed;

    let scale = BigInt::from(10u32).pow(decimals);
    let scaled = (r * BigRational::from_integer(scale.clone())).round().to_integer();
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let d = decimals as usize;
    let padded = format!("{digits:0>width$}", width = d + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - d);
    let sign = if negative { "-" } else { "" };
    if d == 0 {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// One G7-K15 panel: returns (Kronrod estimate, |Kronrod - Gauss|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    // Intervals kept sorted by index so the final sum has a fixed order.
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&f, a, b);
    panels.push((a, b, v, e));
    for _ in 0..MAX_SUBDIVISIONS {
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol {
            return Ok(kahan_sum(panels.iter().map(|p| p.2)));
        }
        let (worst, _) =
            panels.iter().enumerate().fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        let (vl, el) = gk15(&f, lo, mid);
        let (vr, er) = gk15(&f, mid, hi);
        panels[worst] = (lo, mid, vl, el);
        panels.insert(worst + 1, (mid, hi, vr, er));
    }
    Err(Error::NonConvergence(MAX_SUBDIVISIONS))
}

/// `E[f(G)]` for standard normal `G`, integrating over `[-12, 12]`.
///
/// For `|f| <= B` the discarded tails contribute at most `4e-33 * B`.
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    gaussian_expectation_tol(f, 1e-13)
}

pub fn gaussian_expectation_tol<F: Fn(f64) -> f64>(f: F, abs_tol: f64) -> Result<f64> {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let t = GAUSSIAN_TRUNCATION;
    integrate(|g| f(g) * norm * (-0.5 * g * g).exp(), -t, t, abs_tol)
}

/// Bisection on a sign-changing bracket until its width is at most `tol`.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

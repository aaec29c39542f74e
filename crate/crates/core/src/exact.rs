//! Exact sequential prediction cost and conditional entropy of `Y^n` given
//! `b(X^n)`, where `Y^n` is uniform `X^n` observed through a BSC.
//!
//! Three engines share one contract:
//!
//! * the dense engine works on the full `2^n` output law of `Y^n` given each
//!   value of `b`, built by applying the 2x2 channel kernel along every
//!   coordinate of the hypercube;
//! * the noiseless rational engine counts preimage completions per prefix and
//!   is bit-exact;
//! * the symmetric engine collapses prefixes to their Hamming weight and runs
//!   in `O(n^3)` for permutation-invariant functions.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::boolfn::{SymmetricProfile, TruthTable};
use crate::error::{domain, Error, Result};
use crate::numerics::{binent_clamped, binomial, binomial_pmf_half, kahan_sum, ExactRational, KahanSum};

/// Largest arity accepted by the rational noiseless engine.
pub const MAX_NOISELESS_EXACT_ARITY: u32 = 20;
/// Largest arity accepted by [`smse_channel_compose_check`].
pub const MAX_COMPOSE_ARITY: u32 = 16;

#[cfg(feature = "parallel")]
const PAR_THRESHOLD: usize = 1 << 14;
const CHUNK: usize = 1 << 12;

/// Crossover probability of the binary symmetric channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    alpha: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&alpha) {
            return domain(format!("crossover probability {alpha} outside [0, 1/2]"));
        }
        Ok(Self { alpha })
    }

    pub fn noiseless() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// A proper loss `l(outcome, q)`, `q` being the probability assigned to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `(b - q)^2`
    Quadratic,
    /// `-log2(1 - q - b(1 - 2q))`, in bits
    Logarithmic,
}

impl LossKind {
    pub fn loss(self, outcome: bool, q: f64) -> f64 {
        match self {
            LossKind::Quadratic => {
                let b = if outcome { 1.0 } else { 0.0 };
                (b - q) * (b - q)
            }
            LossKind::Logarithmic => {
                let p = if outcome { q } else { 1.0 - q };
                -p.log2()
            }
        }
    }

    /// Expected loss of the honest prediction `q` on a Bernoulli(`q`) outcome:
    /// `q(1 - q)` or `h(q)`.
    pub fn expected(self, q: f64) -> f64 {
        match self {
            LossKind::Quadratic => q * (1.0 - q),
            LossKind::Logarithmic => binent_clamped(q),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithmeticMode {
    Exact,
    Float,
}

/// Per-step and total sequential prediction cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport<T> {
    /// `per_step[k - 1] = E[l(Y_k, Q_k)]`.
    pub per_step: Vec<T>,
    pub total: T,
    /// Cost conditioned on `b = 0` and `b = 1`; `None` for a value `b` never takes.
    pub by_value: [Option<T>; 2],
    /// `P[b = 1]`.
    pub p_one: T,
    pub mode: ArithmeticMode,
}

impl CostReport<ExactRational> {
    pub fn to_float(&self) -> CostReport<f64> {
        let f = |r: &ExactRational| r.to_f64().unwrap_or(f64::NAN);
        CostReport {
            per_step: self.per_step.iter().map(f).collect(),
            total: f(&self.total),
            by_value: [self.by_value[0].as_ref().map(f), self.by_value[1].as_ref().map(f)],
            p_one: f(&self.p_one),
            mode: ArithmeticMode::Exact,
        }
    }
}

/// Law of a length-`level` binary prefix as a dense `2^level` array, indexed
/// with the first coordinate most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixDistribution {
    level: u32,
    probs: Vec<f64>,
    /// Value of `b` conditioned on, when there is one.
    value: Option<bool>,
}

impl PrefixDistribution {
    pub fn from_probs(level: u32, probs: Vec<f64>) -> Result<Self> {
        if level > crate::boolfn::MAX_TABLE_ARITY || probs.len() != 1usize << level {
            return Err(Error::InvalidDistribution(format!(
                "length {} does not match level {level}",
                probs.len()
            )));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
        }
        let total = kahan_sum(probs.iter().copied());
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
        }
        Ok(Self { level, probs, value: None })
    }

    /// Law of `n` independent Bernoulli(`p`) bits.
    pub fn product(n: u32, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("Bernoulli parameter {p} outside [0, 1]"));
        }
        let probs = (0..1usize << n)
            .map(|i| {
                let ones = i.count_ones() as i32;
                p.powi(ones) * (1.0 - p).powi(n as i32 - ones)
            })
            .collect();
        Ok(Self { level: n, probs, value: None })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn value(&self) -> Option<bool> {
        self.value
    }

    /// Law of the first `level - 1` coordinates.
    pub fn marginalize(&self) -> Result<Self> {
        if self.level == 0 {
            return domain("cannot marginalize a level-0 distribution");
        }
        Ok(Self { level: self.level - 1, probs: pair_sums(&self.probs), value: self.value })
    }

    /// Passes every coordinate through an independent BSC(`alpha`).
    pub fn through_channel(mut self, ch: ChannelParams) -> Self {
        apply_channel(&mut self.probs, self.level, ch.alpha);
        self
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        chunked_sum(&self.probs, |chunk| {
            chunk.iter().map(|&p| if p > 0.0 { -p * p.log2() } else { 0.0 }).collect::<KahanSum>()
        })
    }

    /// `E[l(Y_k, P[Y_k = 1 | Y^{k-1}])]` for `k = 1..=level`.
    pub fn sequential_costs(&self, loss: LossKind) -> Vec<f64> {
        let mut steps = vec![0.0; self.level as usize];
        let mut current = self.probs.clone();
        for k in (1..=self.level as usize).rev() {
            steps[k - 1] = chunked_sum(&current, |pairs| {
                pairs
                    .chunks_exact(2)
                    .map(|c| {
                        let parent = c[0] + c[1];
                        if parent > 0.0 {
                            parent * loss.expected((c[1] / parent).min(1.0))
                        } else {
                            0.0
                        }
                    })
                    .collect::<KahanSum>()
            });
            current = pair_sums(&current);
        }
        steps
    }

    /// Unconditional SMSE `sum_k E[Q_k (1 - Q_k)]`.
    pub fn smse(&self) -> f64 {
        kahan_sum(self.sequential_costs(LossKind::Quadratic))
    }
}

fn pair_sums(probs: &[f64]) -> Vec<f64> {
    let half = probs.len() / 2;
    let mut out = vec![0.0; half];
    let fill = |(dst, src): (&mut [f64], &[f64])| {
        for (d, c) in dst.iter_mut().zip(src.chunks_exact(2)) {
            *d = c[0] + c[1];
        }
    };
    #[cfg(feature = "parallel")]
    if probs.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        out.par_chunks_mut(CHUNK).zip(probs.par_chunks(2 * CHUNK)).for_each(fill);
        return out;
    }
    out.chunks_mut(CHUNK).zip(probs.chunks(2 * CHUNK)).for_each(fill);
    out
}

/// Sums per-chunk compensated partial sums in chunk order, so the result does
/// not depend on the number of threads.
fn chunked_sum<F>(data: &[f64], f: F) -> f64
where
    F: Fn(&[f64]) -> KahanSum + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if data.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        let partials: Vec<f64> = data.par_chunks(2 * CHUNK).map(|c| f(c).total()).collect();
        return kahan_sum(partials);
    }
    kahan_sum(data.chunks(2 * CHUNK).map(|c| f(c).total()))
}

/// In-place tensor application of `[[1-a, a], [a, 1-a]]` along every axis.
fn apply_channel(probs: &mut [f64], n: u32, alpha: f64) {
    if alpha == 0.0 {
        return;
    }
    let keep = 1.0 - alpha;
    let mix = |lo: &mut [f64], hi: &mut [f64]| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = keep * x + alpha * y;
            *b = alpha * x + keep * y;
        }
    };
    for axis in 0..n {
        let half = 1usize << axis;
        let block = 2 * half;
        #[cfg(feature = "parallel")]
        if probs.len() >= PAR_THRESHOLD {
            use rayon::prelude::*;
            if block <= CHUNK {
                probs.par_chunks_mut(CHUNK.max(block)).for_each(|big| {
                    for c in big.chunks_mut(block) {
                        let (lo, hi) = c.split_at_mut(half);
                        mix(lo, hi);
                    }
                });
            } else {
                probs.chunks_mut(block).for_each(|c| {
                    let (lo, hi) = c.split_at_mut(half);
                    lo.par_chunks_mut(CHUNK).zip(hi.par_chunks_mut(CHUNK)).for_each(|(l, h)| mix(l, h));
                });
            }
            continue;
        }
        for c in probs.chunks_mut(block) {
            let (lo, hi) = c.split_at_mut(half);
            mix(lo, hi);
        }
    }
}

/// `P[Y^n = y^n | b(X^n) = value]` for every `y^n`.
pub fn output_distribution(b: &TruthTable, value: bool, ch: ChannelParams) -> Result<PrefixDistribution> {
    let size = b.preimage_size(value);
    if size == 0 {
        return Err(Error::EmptyPreimage(value as u8));
    }
    let mass = 1.0 / size as f64;
    let mut probs: Vec<f64> = b.iter().map(|bit| if bit == value { mass } else { 0.0 }).collect();
    apply_channel(&mut probs, b.n(), ch.alpha);
    Ok(PrefixDistribution { level: b.n(), probs, value: Some(value) })
}

/// Sequential prediction cost of `Y^n` given `b(X^n)` on the dense engine.
pub fn seq_cost(b: &TruthTable, ch: ChannelParams, loss: LossKind) -> Result<CostReport<f64>> {
    let n = b.n() as usize;
    let total_inputs = b.len() as f64;
    let mut weighted: Vec<Vec<f64>> = Vec::with_capacity(2);
    let mut by_value = [None, None];
    for value in [false, true] {
        let size = b.preimage_size(value);
        if size == 0 {
            continue;
        }
        let steps = output_distribution(b, value, ch)?.sequential_costs(loss);
        by_value[value as usize] = Some(kahan_sum(steps.iter().copied()));
        let p = size as f64 / total_inputs;
        weighted.push(steps.into_iter().map(|s| p * s).collect());
    }
    let per_step: Vec<f64> = (0..n).map(|k| kahan_sum(weighted.iter().map(|w| w[k]))).collect();
    Ok(CostReport {
        total: kahan_sum(per_step.iter().copied()),
        per_step,
        by_value,
        p_one: b.preimage_size(true) as f64 / total_inputs,
        mode: ArithmeticMode::Float,
    })
}

fn rational(num: impl Into<BigInt>, den: impl Into<BigInt>) -> ExactRational {
    BigRational::new(num.into(), den.into())
}

fn sum_grouped(groups: &BTreeMap<u64, u128>) -> ExactRational {
    groups.iter().fold(ExactRational::zero(), |acc, (&den, &num)| acc + rational(num, den))
}

fn require_quadratic(loss: LossKind) -> Result<()> {
    match loss {
        LossKind::Quadratic => Ok(()),
        LossKind::Logarithmic => {
            Err(Error::NotRational("logarithmic loss involves logarithms of rationals".into()))
        }
    }
}

/// Noiseless sequential cost in exact rational arithmetic.
///
/// For a prefix with `c0`/`c1` preimage completions through 0/1, the step
/// cost contribution is `c0 c1 / (c0 + c1)` over the preimage size. Only
/// quadratic loss has a rational value; logarithmic loss is rejected.
pub fn seq_cost_noiseless(b: &TruthTable, loss: LossKind) -> Result<CostReport<ExactRational>> {
    require_quadratic(loss)?;
    if b.n() > MAX_NOISELESS_EXACT_ARITY {
        return Err(Error::Arity { n: b.n(), min: 1, max: MAX_NOISELESS_EXACT_ARITY });
    }
    let n = b.n() as usize;
    let sizes = [b.preimage_size(false), b.preimage_size(true)];
    let mut per_value: [Option<Vec<ExactRational>>; 2] = [None, None];
    for value in [false, true] {
        if sizes[value as usize] == 0 {
            continue;
        }
        let mut counts: Vec<u64> = b.iter().map(|bit| (bit == value) as u64).collect();
        let mut steps = vec![ExactRational::zero(); n];
        for k in (1..=n).rev() {
            let mut groups: BTreeMap<u64, u128> = BTreeMap::new();
            let mut parents = Vec::with_capacity(counts.len() / 2);
            for c in counts.chunks_exact(2) {
                let parent = c[0] + c[1];
                if c[0] > 0 && c[1] > 0 {
                    *groups.entry(parent).or_default() += c[0] as u128 * c[1] as u128;
                }
                parents.push(parent);
            }
            steps[k - 1] = sum_grouped(&groups);
            counts = parents;
        }
        per_value[value as usize] = Some(steps);
    }
    Ok(exact_report(per_value, &sizes.map(BigUint::from), BigUint::from(b.len()), n))
}

/// `P[b = v | Y^k = y^k]` for each level `k` and prefix weight `j`, the
/// quantity the weight-collapsed engine runs on.
#[derive(Debug, Clone)]
pub struct SymmetricTables {
    n: u32,
    /// `cond[v][k][j]`
    cond: [Vec<Vec<f64>>; 2],
}

impl SymmetricTables {
    pub fn new(s: &SymmetricProfile, ch: ChannelParams) -> Self {
        let n = s.n() as usize;
        let alpha = ch.alpha;
        let keep = 1.0 - alpha;
        let mut cond = [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)];
        // kernel[j][u]: sum over x^k of weight u of P(y^k | x^k), for any fixed
        // y^k of weight j. Each row is a distribution over u.
        let mut kernel: Vec<Vec<f64>> = vec![vec![1.0]];
        for k in 0..=n {
            if k > 0 {
                let prev = &kernel;
                let mut next = vec![vec![0.0; k + 1]; k + 1];
                for (j, row) in next.iter_mut().enumerate() {
                    // Append y_k = 1 to a weight-(j-1) prefix, or y_k = 0 for j = 0.
                    let (src, on_one, on_zero) =
                        if j == 0 { (&prev[0], alpha, keep) } else { (&prev[j - 1], keep, alpha) };
                    for (u, cell) in row.iter_mut().enumerate() {
                        let from_one = if u > 0 { src[u - 1] } else { 0.0 };
                        let from_zero = if u < k { src[u] } else { 0.0 };
                        *cell = on_one * from_one + on_zero * from_zero;
                    }
                }
                kernel = next;
            }
            let r = (n - k) as u64;
            let pmf: Vec<f64> = (0..=r).map(|m| binomial_pmf_half(r, m).prob()).collect();
            for (v, table) in cond.iter_mut().enumerate() {
                let want = v == 1;
                // P[b = v | x^k has weight u]
                let tail: Vec<f64> = (0..=k)
                    .map(|u| {
                        kahan_sum(
                            pmf.iter()
                                .enumerate()
                                .filter(|(m, _)| s.value((u + m) as u32) == want)
                                .map(|(_, &p)| p),
                        )
                    })
                    .collect();
                let row: Vec<f64> =
                    kernel.iter().map(|krow| kahan_sum(krow.iter().zip(&tail).map(|(a, b)| a * b))).collect();
                table.push(row);
            }
        }
        Self { n: s.n(), cond }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `P[b = value | Y^k = y^k]` for any `y^k` of weight `j`.
    pub fn conditional(&self, value: bool, k: usize, j: usize) -> f64 {
        self.cond[value as usize][k][j]
    }

    pub fn p_value(&self, value: bool) -> f64 {
        self.cond[value as usize][0][0]
    }

    /// Joint step costs `E[l(Y_k, Q_k); b = v]` for `k = 1..=n`.
    fn joint_steps(&self, value: bool, loss: LossKind) -> Vec<f64> {
        let table = &self.cond[value as usize];
        (1..=self.n as usize)
            .map(|k| {
                kahan_sum((0..k).map(|j| {
                    let parent = table[k - 1][j];
                    if parent <= 0.0 {
                        return 0.0;
                    }
                    let q = (0.5 * table[k][j + 1] / parent).clamp(0.0, 1.0);
                    binomial_pmf_half((k - 1) as u64, j as u64).prob() * parent * loss.expected(q)
                }))
            })
            .collect()
    }

    /// `H(Y^n | b = value)` in bits; `None` when `b` never takes `value`.
    pub fn cond_entropy_given(&self, value: bool) -> Option<f64> {
        let n = self.n as usize;
        let pv = self.p_value(value);
        if pv <= 0.0 {
            return None;
        }
        let last = &self.cond[value as usize][n];
        Some(kahan_sum((0..=n).map(|j| {
            // P[Y^n = y^n | b = v] = 2^-n c / pv for each of the C(n, j) vectors.
            let ratio = last[j] / pv;
            if ratio <= 0.0 {
                return 0.0;
            }
            binomial_pmf_half(n as u64, j as u64).prob() * ratio * (n as f64 - ratio.log2())
        })))
    }

    /// `H(Y^n | b)` in bits.
    pub fn cond_entropy(&self) -> f64 {
        kahan_sum(
            [false, true].into_iter().filter_map(|v| self.cond_entropy_given(v).map(|h| self.p_value(v) * h)),
        )
    }
}

/// Sequential cost of a symmetric function on the weight-collapsed engine.
pub fn seq_cost_symmetric(
    s: &SymmetricProfile,
    ch: ChannelParams,
    loss: LossKind,
) -> Result<CostReport<f64>> {
    let tables = SymmetricTables::new(s, ch);
    let n = s.n() as usize;
    let mut joint: Vec<Vec<f64>> = Vec::new();
    let mut by_value = [None, None];
    for value in [false, true] {
        let pv = tables.p_value(value);
        if pv <= 0.0 {
            continue;
        }
        let steps = tables.joint_steps(value, loss);
        by_value[value as usize] = Some(kahan_sum(steps.iter().copied()) / pv);
        joint.push(steps);
    }
    let per_step: Vec<f64> = (0..n).map(|k| kahan_sum(joint.iter().map(|w| w[k]))).collect();
    Ok(CostReport {
        total: kahan_sum(per_step.iter().copied()),
        per_step,
        by_value,
        p_one: tables.p_value(true),
        mode: ArithmeticMode::Float,
    })
}

/// Noiseless cost of a symmetric function in exact rationals.
///
/// A prefix of weight `j` at level `k` has `sum_m C(n-k, m) [out(j+m) = v]`
/// completions in the preimage of `v`.
pub fn seq_cost_symmetric_noiseless(
    s: &SymmetricProfile,
    loss: LossKind,
) -> Result<CostReport<ExactRational>> {
    require_quadratic(loss)?;
    let n = s.n() as usize;
    let completions = |value: bool, k: usize, j: usize| -> BigUint {
        let r = (n - k) as u64;
        (0..=r).filter(|&m| s.value((j as u64 + m) as u32) == value).map(|m| binomial(r, m)).sum()
    };
    let total_inputs = BigUint::from(1u8) << n;
    let w1 = s.weight();
    let w0 = &total_inputs - &w1;
    let sizes_big = [w0, w1];
    let mut per_value: [Option<Vec<ExactRational>>; 2] = [None, None];
    for value in [false, true] {
        if sizes_big[value as usize].is_zero() {
            continue;
        }
        let mut steps = Vec::with_capacity(n);
        for k in 1..=n {
            let mut acc = ExactRational::zero();
            for j in 0..k {
                let c1 = completions(value, k, j + 1);
                let c0 = completions(value, k, j);
                if c0.is_zero() || c1.is_zero() {
                    continue;
                }
                let classes = binomial((k - 1) as u64, j as u64);
                let parent = &c0 + &c1;
                acc += rational(classes * c0 * c1, parent);
            }
            steps.push(acc);
        }
        per_value[value as usize] = Some(steps);
    }
    Ok(exact_report(per_value, &sizes_big, total_inputs, n))
}

// per_value holds sum over parents of c0 c1 / parent for each step; the joint
// step cost divides by 2^n and the conditional one by the preimage size.
fn exact_report(
    per_value: [Option<Vec<ExactRational>>; 2],
    sizes: &[BigUint; 2],
    total_inputs: BigUint,
    n: usize,
) -> CostReport<ExactRational> {
    let scale = BigRational::from_integer(BigInt::from(total_inputs.clone()));
    let per_step: Vec<ExactRational> = (0..n)
        .map(|k| {
            per_value.iter().flatten().fold(ExactRational::zero(), |acc, steps| acc + &steps[k]) / &scale
        })
        .collect();
    let by_value = [0, 1].map(|v| {
        per_value[v].as_ref().map(|steps| {
            steps.iter().fold(ExactRational::zero(), |acc, s| acc + s) / rational(sizes[v].clone(), 1u8)
        })
    });
    CostReport {
        total: per_step.iter().fold(ExactRational::zero(), |acc, s| acc + s),
        per_step,
        by_value,
        p_one: rational(sizes[1].clone(), total_inputs),
        mode: ArithmeticMode::Exact,
    }
}

/// `H(Y^n | b(X^n))` in bits, from the full output law.
pub fn cond_entropy(b: &TruthTable, ch: ChannelParams) -> Result<f64> {
    let total_inputs = b.len() as f64;
    let mut parts = Vec::with_capacity(2);
    for value in [false, true] {
        let size = b.preimage_size(value);
        if size == 0 {
            continue;
        }
        let h = output_distribution(b, value, ch)?.entropy();
        parts.push(size as f64 / total_inputs * h);
    }
    Ok(kahan_sum(parts))
}

/// `H(Y^n | s(X^n))` for a symmetric function.
pub fn cond_entropy_symmetric(s: &SymmetricProfile, ch: ChannelParams) -> f64 {
    SymmetricTables::new(s, ch).cond_entropy()
}

fn clamp_tiny_negative(x: f64) -> f64 {
    if x < 0.0 && x > -1e-12 {
        0.0
    } else {
        x
    }
}

/// `I(b(X^n); Y^n) = n - H(Y^n | b(X^n))`.
pub fn mutual_information(b: &TruthTable, ch: ChannelParams) -> Result<f64> {
    Ok(clamp_tiny_negative(b.n() as f64 - cond_entropy(b, ch)?))
}

/// `H(maj(X^n) | Y^n) = 1 + H(Y^n | maj) - n` for odd `n`.
pub fn h_maj_given_y(n: u32, ch: ChannelParams) -> Result<f64> {
    if n.is_multiple_of(2) {
        return domain(format!("majority arity {n} must be odd"));
    }
    let maj = SymmetricProfile::majority(n, Default::default())?;
    Ok(clamp_tiny_negative(1.0 + cond_entropy_symmetric(&maj, ch) - n as f64))
}

/// Returns `(M(W^n), alpha(1-alpha) n + (1-2alpha)^2 M(V^n))` where `W^n` is
/// `V^n` observed through the channel. The first is never below the second,
/// with equality for product laws.
pub fn smse_channel_compose_check(dist: &PrefixDistribution, ch: ChannelParams) -> Result<(f64, f64)> {
    if dist.level() > MAX_COMPOSE_ARITY {
        return Err(Error::Arity { n: dist.level(), min: 0, max: MAX_COMPOSE_ARITY });
    }
    let a = ch.alpha();
    let input = dist.smse();
    let output = dist.clone().through_channel(ch).smse();
    let n = dist.level() as f64;
    Ok((output, a * (1.0 - a) * n + (1.0 - 2.0 * a).powi(2) * input))
}

/// `P[V_k = 1]` for `V^n` uniform on vectors of weight at least `ceil(t n)`.
pub fn tmaj_marginal(n: u32, t: &ExactRational) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::Arity { n, min: 1, max: u32::MAX });
    }
    if *t < ExactRational::zero() || *t > ExactRational::from_integer(1.into()) {
        return domain(format!("threshold {t} outside [0, 1]"));
    }
    let start = (t * ExactRational::from_integer(n.into())).ceil().to_integer();
    let start = start.to_u64().expect("threshold within [0, n]");
    let mut support = BigUint::zero();
    let mut ones = BigUint::zero();
    for m in start..=n as u64 {
        let c = binomial(n as u64, m);
        ones += &c * m;
        support += c;
    }
    if support.is_zero() {
        return domain("empty t-majority support");
    }
    Ok(rational(ones, support * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::TieRule;
    use crate::numerics::binent;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(a: i64, b: i64) -> ExactRational {
        rational(a, b)
    }

    fn maj(n: u32) -> SymmetricProfile {
        SymmetricProfile::majority(n, TieRule::Ones).unwrap()
    }

    fn ch(a: f64) -> ChannelParams {
        ChannelParams::new(a).unwrap()
    }

    fn alpha_grid() -> Vec<f64> {
        (0..=10).map(|i| i as f64 * 0.05).collect()
    }

    fn random_table(rng: &mut ChaCha8Rng, n: u32) -> TruthTable {
        let bits: Vec<bool> = (0..1usize << n).map(|_| rng.gen_bool(0.5)).collect();
        TruthTable::from_bits(n, &bits).unwrap()
    }

    #[test]
    fn channel_domain() {
        assert!(ChannelParams::new(-0.1).is_err());
        assert!(ChannelParams::new(0.6).is_err());
        assert!(ChannelParams::new(0.5).is_ok());
    }

    #[test]
    fn loss_values() {
        assert_eq!(LossKind::Quadratic.loss(true, 0.25), 0.5625);
        assert_eq!(LossKind::Logarithmic.loss(true, 0.25), 2.0);
        assert_eq!(LossKind::Logarithmic.loss(false, 0.5), 1.0);
        assert_eq!(LossKind::Logarithmic.loss(true, 0.0), f64::INFINITY);
        for q in [0.1, 0.3, 0.5] {
            let quad = q * LossKind::Quadratic.loss(true, q) + (1.0 - q) * LossKind::Quadratic.loss(false, q);
            assert!((quad - LossKind::Quadratic.expected(q)).abs() < 1e-15);
            let log =
                q * LossKind::Logarithmic.loss(true, q) + (1.0 - q) * LossKind::Logarithmic.loss(false, q);
            assert!((log - LossKind::Logarithmic.expected(q)).abs() < 1e-15);
        }
    }

    #[test]
    fn output_distribution_examples() {
        let m = maj(3).to_truth_table().unwrap();
        let d = output_distribution(&m, true, ch(0.0)).unwrap();
        let expected: Vec<f64> = m.iter().map(|b| if b { 0.25 } else { 0.0 }).collect();
        assert_eq!(d.probs(), expected.as_slice());

        let d = output_distribution(&m, false, ch(0.5)).unwrap();
        assert!(d.probs().iter().all(|&p| (p - 0.125).abs() < 1e-15));

        let dic = TruthTable::dictator(2, 1).unwrap();
        let d = output_distribution(&dic, true, ch(0.1)).unwrap();
        let want = [0.05, 0.05, 0.45, 0.45];
        for (p, w) in d.probs().iter().zip(want) {
            assert!((p - w).abs() < 1e-15);
        }

        let zero = TruthTable::zeros(3).unwrap();
        assert_eq!(output_distribution(&zero, true, ch(0.1)), Err(Error::EmptyPreimage(1)));
    }

    #[test]
    fn marginalization_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = random_table(&mut rng, 7);
            let alpha = rng.gen_range(0.0..0.5);
            let Ok(d) = output_distribution(&b, true, ch(alpha)) else { continue };
            let mut level = d;
            while level.level() > 0 {
                let parent = level.marginalize().unwrap();
                for (i, &p) in parent.probs().iter().enumerate() {
                    let s = level.probs()[2 * i] + level.probs()[2 * i + 1];
                    assert!((p - s).abs() < 1e-12);
                }
                assert!((kahan_sum(parent.probs().iter().copied()) - 1.0).abs() < 1e-12);
                level = parent;
            }
        }
    }

    #[test]
    fn majority3_noiseless_is_23_over_48() {
        let t = maj(3).to_truth_table().unwrap();
        let exact = seq_cost_noiseless(&t, LossKind::Quadratic).unwrap();
        assert_eq!(exact.total, r(23, 48));
        assert_eq!(exact.per_step, vec![r(3, 16), r(1, 6), r(1, 8)]);
        let dense = seq_cost(&t, ch(0.0), LossKind::Quadratic).unwrap();
        assert!((dense.total - 23.0 / 48.0).abs() < 1e-15);
        let sym = seq_cost_symmetric(&maj(3), ch(0.0), LossKind::Quadratic).unwrap();
        assert!((sym.total - 23.0 / 48.0).abs() < 1e-12);
        let sym_exact = seq_cost_symmetric_noiseless(&maj(3), LossKind::Quadratic).unwrap();
        assert_eq!(sym_exact, exact);
    }

    #[test]
    fn noiseless_closed_forms() {
        for n in 2..=12 {
            let p = TruthTable::parity(n).unwrap();
            assert_eq!(seq_cost_noiseless(&p, LossKind::Quadratic).unwrap().total, r(n as i64 - 1, 4));
            let d = TruthTable::dictator(n, 1).unwrap();
            assert_eq!(seq_cost_noiseless(&d, LossKind::Quadratic).unwrap().total, r(n as i64 - 1, 4));
        }
        let d5 = TruthTable::dictator(5, 1).unwrap();
        assert_eq!(seq_cost_noiseless(&d5, LossKind::Quadratic).unwrap().total, r(1, 1));
        assert!(matches!(seq_cost_noiseless(&d5, LossKind::Logarithmic), Err(Error::NotRational(_))));
        let big = TruthTable::zeros(21).unwrap();
        assert!(matches!(seq_cost_noiseless(&big, LossKind::Quadratic), Err(Error::Arity { .. })));
    }

    #[test]
    fn constant_costs_quarter_per_step() {
        for alpha in alpha_grid() {
            let c = TruthTable::constant(5, true).unwrap();
            let report = seq_cost(&c, ch(alpha), LossKind::Quadratic).unwrap();
            assert!((report.total - 1.25).abs() < 1e-12);
            assert_eq!(report.by_value[0], None);
            assert_eq!(report.p_one, 1.0);
        }
    }

    #[test]
    fn dictator_noisy_closed_form() {
        for n in 1..=10 {
            let d = TruthTable::dictator(n, 1).unwrap();
            for alpha in alpha_grid() {
                let got = seq_cost(&d, ch(alpha), LossKind::Quadratic).unwrap().total;
                let want = (n as f64 - (1.0 - 2.0 * alpha).powi(2)) / 4.0;
                assert!((got - want).abs() < 1e-12, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn symmetric_engine_matches_dense() {
        for n in 1..=10 {
            for alpha in alpha_grid() {
                for s in [
                    maj(n),
                    SymmetricProfile::parity(n).unwrap(),
                    SymmetricProfile::threshold(n, n / 3).unwrap(),
                ] {
                    let dense =
                        seq_cost(&s.to_truth_table().unwrap(), ch(alpha), LossKind::Quadratic).unwrap();
                    let sym = seq_cost_symmetric(&s, ch(alpha), LossKind::Quadratic).unwrap();
                    assert!((dense.total - sym.total).abs() < 1e-10, "n={n} alpha={alpha}");
                    for (a, b) in dense.per_step.iter().zip(&sym.per_step) {
                        assert!((a - b).abs() < 1e-10);
                    }
                    for v in 0..2 {
                        match (dense.by_value[v], sym.by_value[v]) {
                            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-10),
                            (None, None) => {}
                            other => panic!("by_value mismatch {other:?}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn symmetric_tables_marginalize() {
        let s = maj(9);
        let t = SymmetricTables::new(&s, ch(0.17));
        for v in [false, true] {
            for k in 1..=9 {
                for j in 0..k {
                    let parent = t.conditional(v, k - 1, j);
                    let kids = 0.5 * (t.conditional(v, k, j) + t.conditional(v, k, j + 1));
                    assert!((parent - kids).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn fully_noisy_symmetric_is_n_over_4() {
        for n in [1, 4, 7, 30, 101] {
            for s in [maj(n), SymmetricProfile::threshold(n, 1).unwrap()] {
                let report = seq_cost_symmetric(&s, ch(0.5), LossKind::Quadratic).unwrap();
                assert!((report.total - n as f64 / 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn report_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let n = rng.gen_range(1..=8);
            let b = random_table(&mut rng, n);
            let alpha = rng.gen_range(0.0..=0.5);
            let rep = seq_cost(&b, ch(alpha), LossKind::Quadratic).unwrap();
            assert!((rep.total - kahan_sum(rep.per_step.iter().copied())).abs() < 1e-15);
            let mixed = rep.p_one * rep.by_value[1].unwrap_or(0.0)
                + (1.0 - rep.p_one) * rep.by_value[0].unwrap_or(0.0);
            assert!((rep.total - mixed).abs() < 1e-12);
            assert!(rep.per_step.iter().all(|&s| (0.0..=0.25 + 1e-15).contains(&s)));
            let exact = seq_cost_noiseless(&b, LossKind::Quadratic).unwrap();
            let mixed = &exact.p_one * exact.by_value[1].clone().unwrap_or_default()
                + (ExactRational::from_integer(1.into()) - &exact.p_one)
                    * exact.by_value[0].clone().unwrap_or_default();
            assert_eq!(exact.total, mixed);
        }
    }

    #[test]
    fn complement_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(1..=9);
            let b = random_table(&mut rng, n);
            let exact = seq_cost_noiseless(&b, LossKind::Quadratic).unwrap().total;
            assert_eq!(exact, seq_cost_noiseless(&b.complement(), LossKind::Quadratic).unwrap().total);
            let alpha = rng.gen_range(0.0..0.5);
            let a = seq_cost(&b, ch(alpha), LossKind::Quadratic).unwrap().total;
            let c = seq_cost(&b.complement(), ch(alpha), LossKind::Quadratic).unwrap().total;
            assert!((a - c).abs() < 1e-13);
        }
    }

    #[test]
    fn permutation_covariance() {
        // Relabelling coordinates of a symmetric function changes nothing; for a
        // general function, cost at step k is unchanged when every coordinate
        // keeps its position relative to the prefix (here: swapping x_n and x_{n-1}
        // leaves steps 1..n-2 untouched and the two-step sum unchanged).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = maj(7).to_truth_table().unwrap();
        let perm = [3, 0, 6, 2, 5, 1, 4];
        assert_eq!(
            seq_cost_noiseless(&s, LossKind::Quadratic).unwrap().total,
            seq_cost_noiseless(&s.permute_inputs(&perm).unwrap(), LossKind::Quadratic).unwrap().total
        );
        for _ in 0..20 {
            let n = rng.gen_range(3..=8u32);
            let b = random_table(&mut rng, n);
            let mut perm: Vec<u32> = (0..n).collect();
            perm.swap(n as usize - 1, n as usize - 2);
            let a = seq_cost_noiseless(&b, LossKind::Quadratic).unwrap();
            let c = seq_cost_noiseless(&b.permute_inputs(&perm).unwrap(), LossKind::Quadratic).unwrap();
            let m = n as usize;
            assert_eq!(a.per_step[..m - 2], c.per_step[..m - 2]);
            assert_eq!(&a.per_step[m - 2] + &a.per_step[m - 1], &c.per_step[m - 2] + &c.per_step[m - 1]);
        }
    }

    #[test]
    fn log_loss_equals_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let n = rng.gen_range(1..=9);
            let b = random_table(&mut rng, n);
            let alpha = rng.gen_range(0.0..=0.5);
            let cost = seq_cost(&b, ch(alpha), LossKind::Logarithmic).unwrap().total;
            let h = cond_entropy(&b, ch(alpha)).unwrap();
            assert!((cost - h).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_examples() {
        for n in 1..=10 {
            let d = TruthTable::dictator(n, 1).unwrap();
            for alpha in alpha_grid() {
                let h = cond_entropy(&d, ch(alpha)).unwrap();
                assert!((h - (n as f64 - 1.0 + binent(alpha).unwrap())).abs() < 1e-10);
            }
            let c = TruthTable::constant(n, false).unwrap();
            assert!((cond_entropy(&c, ch(0.2)).unwrap() - n as f64).abs() < 1e-12);
            assert!(mutual_information(&c, ch(0.2)).unwrap().abs() < 1e-12);
        }
        let m = maj(5).to_truth_table().unwrap();
        assert!((cond_entropy(&m, ch(0.0)).unwrap() - 4.0).abs() < 1e-12);
        let p = TruthTable::parity(6).unwrap();
        assert!((cond_entropy(&p, ch(0.0)).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let d = TruthTable::dictator(4, 2).unwrap();
        let mi = mutual_information(&d, ch(0.1)).unwrap();
        assert!((mi - 0.531_004_406_410_719_4).abs() < 1e-6);
        let m = maj(5).to_truth_table().unwrap();
        let mi = mutual_information(&m, ch(0.1)).unwrap();
        assert!(mi > 0.0 && mi < 1.0 - binent(0.1).unwrap(), "{mi}");
    }

    #[test]
    fn symmetric_entropy_matches_dense() {
        for n in 1..=11 {
            for alpha in alpha_grid() {
                let s = maj(n);
                let dense = cond_entropy(&s.to_truth_table().unwrap(), ch(alpha)).unwrap();
                assert!((dense - cond_entropy_symmetric(&s, ch(alpha))).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn h_maj_given_y_examples() {
        for n in [1, 3, 5, 11, 25] {
            assert!(h_maj_given_y(n, ch(0.0)).unwrap().abs() < 1e-10);
            assert!((h_maj_given_y(n, ch(0.5)).unwrap() - 1.0).abs() < 1e-10);
        }
        assert!(h_maj_given_y(4, ch(0.1)).is_err());
        // Direct form E[h(P[maj = 1 | Y^n])].
        for alpha in [0.05, 0.2, 0.35] {
            let n = 9u32;
            let t = SymmetricTables::new(&maj(n), ch(alpha));
            let direct = kahan_sum((0..=n as usize).map(|j| {
                binomial_pmf_half(n as u64, j as u64).prob()
                    * binent(t.conditional(true, n as usize, j)).unwrap()
            }));
            assert!((direct - h_maj_given_y(n, ch(alpha)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_composition_examples() {
        for beta in [0.1, 0.3, 0.5, 0.9] {
            let v = PrefixDistribution::product(3, beta).unwrap();
            let (lhs, rhs) = smse_channel_compose_check(&v, ch(0.2)).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
        let v = PrefixDistribution::product(1, 0.3).unwrap();
        let (lhs, rhs) = smse_channel_compose_check(&v, ch(0.1)).unwrap();
        assert!((lhs - 0.2244).abs() < 1e-12 && (rhs - 0.2244).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let raw: Vec<f64> = (0..1usize << n).map(|_| rng.gen::<f64>().powi(3)).collect();
            let total: f64 = raw.iter().sum();
            let dist = PrefixDistribution::from_probs(n, raw.iter().map(|x| x / total).collect()).unwrap();
            let alpha = rng.gen_range(0.0..=0.5);
            let (lhs, rhs) = smse_channel_compose_check(&dist, ch(alpha)).unwrap();
            assert!(lhs >= rhs - 1e-12);
            let (half, _) = smse_channel_compose_check(&dist, ch(0.5)).unwrap();
            assert!((half - n as f64 / 4.0).abs() < 1e-12);
        }
        assert!(PrefixDistribution::from_probs(2, vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(PrefixDistribution::from_probs(2, vec![0.5, 0.5]).is_err());
        assert!(PrefixDistribution::from_probs(1, vec![0.5, 0.6]).is_err());
        let big = PrefixDistribution::product(17, 0.5).unwrap();
        assert!(smse_channel_compose_check(&big, ch(0.1)).is_err());
    }

    fn tmaj_brute(n: u32, start: u32) -> ExactRational {
        let (mut ones, mut slots) = (0i64, 0i64);
        for x in 0u32..1 << n {
            if x.count_ones() >= start {
                ones += (x >> (n - 1)) as i64 & 1;
                slots += 1;
            }
        }
        r(ones, slots)
    }

    #[test]
    fn tmaj_marginal_examples() {
        assert_eq!(tmaj_marginal(3, &r(1, 2)).unwrap(), r(3, 4));
        for n in 1..=12 {
            assert_eq!(tmaj_marginal(n, &r(0, 1)).unwrap(), r(1, 2));
            assert_eq!(tmaj_marginal(n, &r(1, 1)).unwrap(), r(1, 1));
            for num in 0..=10 {
                let t = r(num, 10);
                let start =
                    (&t * ExactRational::from_integer(n.into())).ceil().to_integer().to_u32().unwrap();
                assert_eq!(tmaj_marginal(n, &t).unwrap(), tmaj_brute(n, start));
            }
        }
        assert!(tmaj_marginal(4, &r(3, 2)).is_err());
        assert!(tmaj_marginal(4, &r(-1, 2)).is_err());
    }

    #[test]
    fn tmaj_lower_bound() {
        for n in 1..=40 {
            for num in 0..=20 {
                let t = r(num, 20);
                let half = r(1, 2);
                let floor = if t > half { t.clone() } else { half };
                assert!(tmaj_marginal(n, &t).unwrap() >= floor, "n={n} t={t}");
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn table() -> impl Strategy<Value = TruthTable> {
            (1u32..=7).prop_flat_map(|n| {
                proptest::collection::vec(any::<bool>(), 1usize << n)
                    .prop_map(move |bits| TruthTable::from_bits(n, &bits).unwrap())
            })
        }

        fn distribution() -> impl Strategy<Value = PrefixDistribution> {
            (1u32..=6).prop_flat_map(|n| {
                proptest::collection::vec(0.0f64..1.0, 1usize << n).prop_filter_map("zero mass", move |raw| {
                    let total: f64 = raw.iter().sum();
                    (total > 1e-6).then(|| {
                        PrefixDistribution::from_probs(n, raw.iter().map(|x| x / total).collect()).unwrap()
                    })
                })
            })
        }

        proptest! {
            #[test]
            fn complement_leaves_cost_unchanged(t in table(), alpha in 0.0f64..=0.5) {
                let c = t.complement();
                prop_assert_eq!(
                    seq_cost_noiseless(&t, LossKind::Quadratic).unwrap().total,
                    seq_cost_noiseless(&c, LossKind::Quadratic).unwrap().total
                );
                let a = seq_cost(&t, ch(alpha), LossKind::Quadratic).unwrap().total;
                let b = seq_cost(&c, ch(alpha), LossKind::Quadratic).unwrap().total;
                prop_assert!((a - b).abs() < 1e-12);
            }

            #[test]
            fn total_mixes_conditional_costs(t in table(), alpha in 0.0f64..=0.5) {
                let rep = seq_cost(&t, ch(alpha), LossKind::Quadratic).unwrap();
                let mixed = rep.p_one * rep.by_value[1].unwrap_or(0.0)
                    + (1.0 - rep.p_one) * rep.by_value[0].unwrap_or(0.0);
                prop_assert!((rep.total - mixed).abs() < 1e-12);
                let n = t.n() as f64;
                prop_assert!(rep.total >= -1e-15 && rep.total <= n / 4.0 + 1e-12);
            }

            #[test]
            fn log_loss_is_conditional_entropy(t in table(), alpha in 0.0f64..=0.5) {
                let cost = seq_cost(&t, ch(alpha), LossKind::Logarithmic).unwrap().total;
                prop_assert!((cost - cond_entropy(&t, ch(alpha)).unwrap()).abs() < 1e-10);
            }

            #[test]
            fn channel_never_lowers_composed_cost(d in distribution(), alpha in 0.0f64..=0.5) {
                let (lhs, rhs) = smse_channel_compose_check(&d, ch(alpha)).unwrap();
                prop_assert!(lhs >= rhs - 1e-12);
            }

            #[test]
            fn product_laws_compose_with_equality(n in 1u32..=6, p in 0.0f64..=1.0, alpha in 0.0f64..=0.5) {
                let d = PrefixDistribution::product(n, p).unwrap();
                let (lhs, rhs) = smse_channel_compose_check(&d, ch(alpha)).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }
        }
    }
}

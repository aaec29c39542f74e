//! Minimum noiseless SMSE over all Boolean functions of a given weight.
//!
//! Splitting on `x_1`, the first-step cost depends only on the cofactor
//! weights `(w0, w1)`, and the remaining steps are the average of the two
//! cofactors' costs. That gives
//! `C(m, w) = min_{w0 + w1 = w} first_bit_cost(m, w0, w1) + (C(m-1, w0) + C(m-1, w1)) / 2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::boolfn::{FnWeight, SymmetricProfile, TieRule, TruthTable};
use crate::error::{domain, Error, Result};
use crate::exact::{
    mutual_information, seq_cost, seq_cost_noiseless, seq_cost_symmetric_noiseless, ChannelParams, LossKind,
};
use crate::numerics::ExactRational;

/// Largest arity [`dp_optimal`] accepts.
pub const MAX_DP_ARITY: u32 = 11;
/// Largest arity [`brute_force`] accepts.
pub const MAX_BRUTE_FORCE_ARITY: u32 = 4;

fn ratio(num: u64, den: u64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `first_bit_cost` without validation, in floating point.
fn first_bit_cost_f64(m: u32, w0: u64, w1: u64) -> f64 {
    let full = (1u64 << m) as f64;
    let half = full / 2.0;
    let w = (w0 + w1) as f64;
    let mut acc = 0.0;
    if w > 0.0 {
        acc += w0 as f64 * w1 as f64 / w;
    }
    if w < full {
        acc += (half - w0 as f64) * (half - w1 as f64) / (full - w);
    }
    acc / full
}

/// `M(X_1 | b(X^m))` for any `b` whose `x_1 = 0` and `x_1 = 1` cofactors have
/// weights `w0` and `w1`.
///
/// With `W = 2^m`, `H = W / 2` and `w = w0 + w1` this is
/// `(w0 w1 / w + (H - w0)(H - w1) / (W - w)) / W`, dropping a term whose
/// branch has probability zero.
pub fn first_bit_cost(m: u32, w0: FnWeight, w1: FnWeight) -> Result<ExactRational> {
    if !(1..=62).contains(&m) {
        return Err(Error::Arity { n: m, min: 1, max: 62 });
    }
    let full = 1u64 << m;
    let half = full / 2;
    let (w0, w1) = (w0.0, w1.0);
    if w0 > half || w1 > half {
        return domain(format!("cofactor weights ({w0}, {w1}) exceed {half}"));
    }
    let w = w0 + w1;
    let mut acc = ExactRational::zero();
    if w > 0 {
        acc += ratio(w0 * w1, w);
    }
    if w < full {
        acc += ExactRational::from(BigInt::from((half - w0) as u128 * (half - w1) as u128))
            / BigInt::from(full - w);
    }
    Ok(acc / BigInt::from(full))
}

/// Optimal weight-constrained costs `C(m, w)` for `m = 0..=n`, with one
/// minimizing split per cell.
#[derive(Debug, Clone)]
pub struct DpTable {
    n: u32,
    costs: Vec<Vec<ExactRational>>,
    splits: Vec<Vec<(u64, u64)>>,
}

impl DpTable {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn cost(&self, m: u32, w: u64) -> &ExactRational {
        &self.costs[m as usize][w as usize]
    }

    /// Minimizing `(w0, w1)` for cell `(m, w)`, `m >= 1`.
    pub fn split(&self, m: u32, w: u64) -> (u64, u64) {
        self.splits[m as usize][w as usize]
    }

    /// `min_w C(n, w)` and the smallest weight attaining it.
    pub fn optimum(&self) -> (FnWeight, &ExactRational) {
        self.optimum_at(self.n)
    }

    /// `min_w C(m, w)` for `m <= n`.
    pub fn optimum_at(&self, m: u32) -> (FnWeight, &ExactRational) {
        let row = &self.costs[m as usize];
        let mut best = 0;
        for (w, c) in row.iter().enumerate() {
            if c < &row[best] {
                best = w;
            }
        }
        (FnWeight(best as u64), &row[best])
    }
}

fn fill_cell(m: u32, w: u64, prev: &[ExactRational], prev_f: &[f64]) -> (ExactRational, (u64, u64)) {
    let half = 1u64 << (m - 1);
    let lo = w.saturating_sub(half);
    let hi = w.min(half);
    let value = |w0: u64| {
        let w1 = w - w0;
        first_bit_cost_f64(m, w0, w1) + 0.5 * (prev_f[w0 as usize] + prev_f[w1 as usize])
    };
    let best_f = (lo..=hi).map(value).fold(f64::INFINITY, f64::min);
    // Floating-point error here is around 1e-15; anything within the slack is
    // settled exactly.
    let slack = 1e-9 * best_f.abs().max(1.0);
    let mut best: Option<(ExactRational, u64)> = None;
    for w0 in (lo..=hi).filter(|&w0| value(w0) <= best_f + slack) {
        let w1 = w - w0;
        let c = first_bit_cost(m, FnWeight(w0), FnWeight(w1)).expect("split in range")
            + (&prev[w0 as usize] + &prev[w1 as usize]) / BigInt::from(2);
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, w0));
        }
    }
    let (c, w0) = best.expect("non-empty split range");
    (c, (w0, w - w0))
}

/// Fills `C(m, w)` for every `m <= n` and `0 <= w <= 2^m`.
pub fn dp_optimal(n: u32) -> Result<DpTable> {
    if !(1..=MAX_DP_ARITY).contains(&n) {
        return Err(Error::Arity { n, min: 1, max: MAX_DP_ARITY });
    }
    let mut costs = vec![vec![ExactRational::zero(); 2]];
    let mut splits = vec![Vec::new()];
    for m in 1..=n {
        let prev = &costs[m as usize - 1];
        let prev_f: Vec<f64> = prev.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        let weights: Vec<u64> = (0..=1u64 << m).collect();
        #[cfg(feature = "parallel")]
        let cells: Vec<_> = {
            use rayon::prelude::*;
            weights.par_iter().map(|&w| fill_cell(m, w, prev, &prev_f)).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let cells: Vec<_> = weights.iter().map(|&w| fill_cell(m, w, prev, &prev_f)).collect();
        let (row, split): (Vec<_>, Vec<_>) = cells.into_iter().unzip();
        costs.push(row);
        splits.push(split);
    }
    Ok(DpTable { n, costs, splits })
}

/// A weight-`w` function of `table.n()` inputs whose noiseless cost is `C(n, w)`.
pub fn reconstruct(table: &DpTable, w: FnWeight) -> Result<TruthTable> {
    let n = table.n;
    if w.0 > 1u64 << n {
        return domain(format!("weight {} exceeds 2^{n}", w.0));
    }
    build(table, n, w.0)
}

fn build(table: &DpTable, m: u32, w: u64) -> Result<TruthTable> {
    let (w0, w1) = table.split(m, w);
    if m == 1 {
        return TruthTable::from_bits(1, &[w0 == 1, w1 == 1]);
    }
    TruthTable::from_cofactors(&build(table, m - 1, w0)?, &build(table, m - 1, w1)?)
}

/// Smallest Hamming distance between `a` and `b` after any relabelling and
/// negation of `a`'s inputs and optional negation of its output.
pub fn distance_up_to_symmetry(a: &TruthTable, b: &TruthTable) -> Result<u64> {
    let n = a.n();
    if n != b.n() {
        return domain("functions have different arities");
    }
    if n > 8 {
        return Err(Error::Arity { n, min: 1, max: 8 });
    }
    let mut best = u64::MAX;
    for perm in permutations(n) {
        let p = a.permute_inputs(&perm)?;
        for mask in 0..1usize << n {
            let f = p.flip_inputs(mask);
            let d = f.distance(b)?;
            best = best.min(d).min(f.len() as u64 - d);
        }
    }
    Ok(best)
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinSmse,
    MaxSmse,
    MaxMi,
}

/// Objective value: exact for noiseless SMSE, floating point otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveValue {
    Exact(ExactRational),
    Float(f64),
}

impl ObjectiveValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ObjectiveValue::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            ObjectiveValue::Float(x) => *x,
        }
    }

    /// `self` beats `other`; float values must win by more than a relative 1e-12.
    fn beats(&self, other: &Self, maximize: bool) -> bool {
        match (self, other) {
            (ObjectiveValue::Exact(a), ObjectiveValue::Exact(b)) => {
                if maximize {
                    a > b
                } else {
                    a < b
                }
            }
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let slack = 1e-12 * a.abs().max(b.abs()).max(1e-300);
                if maximize {
                    a > b + slack
                } else {
                    a < b - slack
                }
            }
        }
    }
}

/// Exhaustive search over every function of `n <= 4` inputs, optionally only
/// those of weight `weight`. Ties go to the smallest encoding `sum_i b(i) 2^i`.
pub fn brute_force(
    n: u32,
    objective: Objective,
    ch: ChannelParams,
    weight: Option<FnWeight>,
) -> Result<(TruthTable, ObjectiveValue)> {
    if !(1..=MAX_BRUTE_FORCE_ARITY).contains(&n) {
        return Err(Error::Arity { n, min: 1, max: MAX_BRUTE_FORCE_ARITY });
    }
    let len = 1usize << n;
    if let Some(w) = weight {
        if w.0 > len as u64 {
            return domain(format!("weight {} exceeds 2^{n}", w.0));
        }
    }
    let maximize = objective != Objective::MinSmse;
    let mut best: Option<(TruthTable, ObjectiveValue)> = None;
    for code in 0u64..1 << len {
        if weight.is_some_and(|w| code.count_ones() as u64 != w.0) {
            continue;
        }
        let table = TruthTable::from_fn(n, |i| (code >> i) & 1 == 1)?;
        let value = match objective {
            Objective::MinSmse | Objective::MaxSmse if ch.alpha() == 0.0 => {
                ObjectiveValue::Exact(seq_cost_noiseless(&table, LossKind::Quadratic)?.total)
            }
            Objective::MinSmse | Objective::MaxSmse => {
                ObjectiveValue::Float(seq_cost(&table, ch, LossKind::Quadratic)?.total)
            }
            Objective::MaxMi => ObjectiveValue::Float(mutual_information(&table, ch)?),
        };
        if best.as_ref().is_none_or(|(_, b)| value.beats(b, maximize)) {
            best = Some((table, value));
        }
    }
    best.ok_or_else(|| Error::Domain("no function has the requested weight".into()))
}

/// One row of the majority-versus-optimum comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub n: u32,
    pub majority: ExactRational,
    pub optimum: ExactRational,
    pub optimum_weight: FnWeight,
    /// `majority - optimum`, never negative.
    pub excess: ExactRational,
    /// `(n - 2 ln 2) / 4`.
    pub lower_bound: f64,
}

/// Row for arity `n <= table.n()`.
pub fn table1_row(table: &DpTable, n: u32) -> Result<Table1Row> {
    if n == 0 || n > table.n() {
        return Err(Error::Arity { n, min: 1, max: table.n() });
    }
    let maj = SymmetricProfile::majority(n, TieRule::Ones)?;
    let majority = seq_cost_symmetric_noiseless(&maj, LossKind::Quadratic)?.total;
    let (w, optimum) = table.optimum_at(n);
    Ok(Table1Row {
        n,
        excess: &majority - optimum,
        optimum: optimum.clone(),
        majority,
        optimum_weight: w,
        lower_bound: (n as f64 - 2.0 * std::f64::consts::LN_2) / 4.0,
    })
}

/// Rows for odd `n` from 3 to `n_max`, sharing one DP pass.
pub fn table1_rows(n_max: u32) -> Result<Vec<Table1Row>> {
    if n_max < 3 {
        return Err(Error::Arity { n: n_max, min: 3, max: MAX_DP_ARITY });
    }
    let table = dp_optimal(n_max)?;
    (3..=n_max).step_by(2).map(|n| table1_row(&table, n)).collect()
}

//! Boolean functions on `{0,1}^n`: explicit truth tables and
//! permutation-invariant (symmetric) profiles.
//!
//! Inputs are indexed by the integer whose most significant of `n` bits is
//! `x_1`, so the two cofactors on `x_1` are the lower and upper halves of the
//! table.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::binomial;

/// Largest arity of an explicit truth table (2^26 bits).
pub const MAX_TABLE_ARITY: u32 = 26;
/// Largest arity of a symmetric profile.
pub const MAX_PROFILE_ARITY: u32 = 4096;

/// Number of inputs a function maps to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnWeight(pub u64);

fn check_table_arity(n: u32) -> Result<()> {
    if (1..=MAX_TABLE_ARITY).contains(&n) {
        Ok(())
    } else {
        Err(Error::Arity { n, min: 1, max: MAX_TABLE_ARITY })
    }
}

/// An explicit Boolean function of `n` inputs, stored as `2^n` packed bits.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: u32,
    words: Vec<u64>,
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable(n={}, hex={})", self.n, self.to_hex())
    }
}

impl TruthTable {
    /// The constant-0 function.
    pub fn zeros(n: u32) -> Result<Self> {
        check_table_arity(n)?;
        let len = 1usize << n;
        Ok(Self { n, words: vec![0; len.div_ceil(64)] })
    }

    pub fn from_fn(n: u32, f: impl Fn(usize) -> bool) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for i in 0..t.len() {
            if f(i) {
                t.set(i, true);
            }
        }
        Ok(t)
    }

    pub fn from_bits(n: u32, bits: &[bool]) -> Result<Self> {
        check_table_arity(n)?;
        if bits.len() != 1usize << n {
            return Err(Error::Parse(format!(
                "expected {} bits for n = {n}, got {}",
                1usize << n,
                bits.len()
            )));
        }
        Self::from_fn(n, |i| bits[i])
    }

    pub fn constant(n: u32, value: bool) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    /// `b(x) = x_i`, coordinates numbered from 1.
    pub fn dictator(n: u32, i: u32) -> Result<Self> {
        check_table_arity(n)?;
        if i == 0 || i > n {
            return domain(format!("dictator coordinate {i} outside 1..={n}"));
        }
        let shift = n - i;
        Self::from_fn(n, |x| (x >> shift) & 1 == 1)
    }

    pub fn parity(n: u32) -> Result<Self> {
        Self::from_fn(n, |x| x.count_ones() % 2 == 1)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of inputs, `2^n`.
    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn weight(&self) -> FnWeight {
        FnWeight(self.words.iter().map(|w| w.count_ones() as u64).sum())
    }

    /// Size of the preimage of `value`.
    pub fn preimage_size(&self, value: bool) -> u64 {
        let w = self.weight().0;
        if value {
            w
        } else {
            self.len() as u64 - w
        }
    }

    pub fn complement(&self) -> Self {
        let mut t = self.clone();
        for w in &mut t.words {
            *w = !*w;
        }
        t.mask_tail();
        t
    }

    fn mask_tail(&mut self) {
        let len = self.len();
        if len < 64 {
            self.words[0] &= (1u64 << len) - 1;
        }
    }

    /// Restriction `x_1 = value`, a function of the remaining `n - 1` inputs.
    pub fn cofactor(&self, value: bool) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::Arity { n: self.n, min: 2, max: MAX_TABLE_ARITY });
        }
        let half = self.len() / 2;
        let offset = if value { half } else { 0 };
        if half >= 64 {
            let start = offset / 64;
            Ok(Self { n: self.n - 1, words: self.words[start..start + half / 64].to_vec() })
        } else {
            Self::from_fn(self.n - 1, |i| self.get(offset + i))
        }
    }

    /// Concatenates the `x_1 = 0` and `x_1 = 1` cofactors.
    pub fn from_cofactors(zero: &Self, one: &Self) -> Result<Self> {
        if zero.n != one.n {
            return domain("cofactors have different arities");
        }
        let half = zero.len();
        Self::from_fn(zero.n + 1, |i| if i < half { zero.get(i) } else { one.get(i - half) })
    }

    /// `c(x) = b(y)` where `y_{perm[j]} = x_j` (0-based coordinates).
    pub fn permute_inputs(&self, perm: &[u32]) -> Result<Self> {
        let n = self.n as usize;
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm.iter().any(|&p| (p as usize) >= n || std::mem::replace(&mut seen[p as usize], true))
        {
            return domain("not a permutation of the input coordinates");
        }
        Self::from_fn(self.n, |x| {
            let mut y = 0usize;
            for (j, &p) in perm.iter().enumerate() {
                let bit = (x >> (n - 1 - j)) & 1;
                y |= bit << (n - 1 - p as usize);
            }
            self.get(y)
        })
    }

    /// `c(x) = b(x xor mask)`.
    pub fn flip_inputs(&self, mask: usize) -> Self {
        let mask = mask & (self.len() - 1);
        Self::from_fn(self.n, |x| self.get(x ^ mask)).expect("arity already validated")
    }

    /// The profile of `self` if it is constant on every Hamming-weight class.
    pub fn detect_symmetric(&self) -> Option<SymmetricProfile> {
        let n = self.n as usize;
        let mut out: Vec<Option<bool>> = vec![None; n + 1];
        for i in 0..self.len() {
            let w = i.count_ones() as usize;
            let b = self.get(i);
            match out[w] {
                None => out[w] = Some(b),
                Some(prev) if prev != b => return None,
                _ => {}
            }
        }
        Some(SymmetricProfile { n: self.n, out: out.into_iter().map(|b| b.unwrap_or(false)).collect() })
    }

    /// `sum_i b(i) 2^i`, the order used for tie-breaking in exhaustive search.
    pub fn encoding(&self) -> BigUint {
        let mut digits = Vec::with_capacity(self.words.len() * 2);
        for w in &self.words {
            digits.push(*w as u32);
            digits.push((*w >> 32) as u32);
        }
        BigUint::new(digits)
    }

    /// Big-endian hex of [`Self::encoding`], zero-padded to `ceil(2^n / 4)`
    /// uppercase digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|j| 4 * d + j < self.len() && self.get(4 * d + j))
                    .fold(0u32, |acc, j| acc | (1 << j));
                char::from_digit(nibble, 16).unwrap().to_ascii_uppercase()
            })
            .collect()
    }

    pub fn from_hex(n: u32, hex: &str) -> Result<Self> {
        check_table_arity(n)?;
        let mut t = Self::zeros(n)?;
        let hex = hex.trim();
        let expected = t.len().div_ceil(4);
        if hex.len() != expected {
            return Err(Error::Parse(format!("hex for n = {n} needs {expected} digits, got {}", hex.len())));
        }
        for (d, c) in hex.chars().rev().enumerate() {
            let nibble =
                c.to_digit(16).ok_or_else(|| Error::Parse(format!("invalid hex character {c:?}")))?;
            for j in 0..4 {
                if nibble >> j & 1 == 1 {
                    let i = 4 * d + j;
                    if i >= t.len() {
                        return Err(Error::Parse(format!("bit {i} set beyond 2^{n} inputs")));
                    }
                    t.set(i, true);
                }
            }
        }
        Ok(t)
    }

    pub fn from_minterms(n: u32, minterms: &[u64]) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for &m in minterms {
            if m >= t.len() as u64 {
                return Err(Error::Parse(format!("minterm {m} out of range for n = {n}")));
            }
            t.set(m as usize, true);
        }
        Ok(t)
    }

    pub fn minterms(&self) -> Vec<u64> {
        (0..self.len()).filter(|&i| self.get(i)).map(|i| i as u64).collect()
    }

    /// Number of inputs on which `self` and `other` differ.
    pub fn distance(&self, other: &Self) -> Result<u64> {
        if self.n != other.n {
            return domain("tables have different arities");
        }
        let mut diff = self.clone();
        for (a, b) in diff.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
        Ok(diff.weight().0)
    }
}

/// How majority resolves inputs of weight exactly `n / 2` for even `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    #[default]
    Ones,
    Zeros,
}

/// A permutation-invariant function: `out[w]` is its value on every input of
/// Hamming weight `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetricProfile {
    n: u32,
    out: Vec<bool>,
}

impl SymmetricProfile {
    pub fn new(n: u32, out: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_PROFILE_ARITY {
            return Err(Error::Arity { n, min: 1, max: MAX_PROFILE_ARITY });
        }
        if out.len() != n as usize + 1 {
            return Err(Error::Parse(format!("profile for n = {n} needs {} entries", n + 1)));
        }
        Ok(Self { n, out })
    }

    /// 1 iff the weight exceeds `n / 2`; the tie class follows `tie`.
    pub fn majority(n: u32, tie: TieRule) -> Result<Self> {
        let out = (0..=n)
            .map(|w| match (2 * w).cmp(&n) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => tie == TieRule::Ones,
            })
            .collect();
        Self::new(n, out)
    }

    /// 1 on every input of weight at least `t`.
    pub fn threshold(n: u32, t: u32) -> Result<Self> {
        Self::new(n, (0..=n).map(|w| w >= t).collect())
    }

    /// Unbalanced majority: 1 on the heaviest inputs, about `q 2^n` of them.
    ///
    /// Weight classes are never split, so the realized weight is the
    /// threshold union closest to `q 2^n` (the heavier union on a tie).
    pub fn maj_q(n: u32, q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return domain(format!("maj_q fraction {q} outside (0, 1)"));
        }
        if n == 0 || n > MAX_PROFILE_ARITY {
            return Err(Error::Arity { n, min: 1, max: MAX_PROFILE_ARITY });
        }
        let target = BigRational::from_float(q).expect("finite q")
            * BigRational::from_integer(BigInt::from(BigUint::from(1u8) << n as usize));
        let mut best_t = n + 1;
        let mut best_gap = target.clone();
        let mut union = BigUint::zero();
        for t in (0..=n).rev() {
            union += binomial(n as u64, t as u64);
            let gap = (BigRational::from_integer(BigInt::from(union.clone())) - &target).abs();
            if gap <= best_gap {
                best_gap = gap;
                best_t = t;
            }
        }
        Self::threshold(n, best_t)
    }

    pub fn parity(n: u32) -> Result<Self> {
        Self::new(n, (0..=n).map(|w| w % 2 == 1).collect())
    }

    pub fn constant(n: u32, value: bool) -> Result<Self> {
        Self::new(n, vec![value; n as usize + 1])
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn out(&self) -> &[bool] {
        &self.out
    }

    pub fn value(&self, weight: u32) -> bool {
        self.out[weight as usize]
    }

    /// `sum_w C(n, w) out[w]`.
    pub fn weight(&self) -> BigUint {
        (0..=self.n).filter(|&w| self.out[w as usize]).map(|w| binomial(self.n as u64, w as u64)).sum()
    }

    pub fn complement(&self) -> Self {
        Self { n: self.n, out: self.out.iter().map(|b| !b).collect() }
    }

    pub fn to_truth_table(&self) -> Result<TruthTable> {
        TruthTable::from_fn(self.n, |x| self.out[x.count_ones() as usize])
    }
}

/// Either representation, as accepted by the function file format.
#[derive(Debug, Clone, PartialEq)]
pub enum BoolFn {
    Table(TruthTable),
    Symmetric(SymmetricProfile),
}

impl BoolFn {
    pub fn n(&self) -> u32 {
        match self {
            BoolFn::Table(t) => t.n(),
            BoolFn::Symmetric(s) => s.n(),
        }
    }

    pub fn to_truth_table(&self) -> Result<TruthTable> {
        match self {
            BoolFn::Table(t) => Ok(t.clone()),
            BoolFn::Symmetric(s) => s.to_truth_table(),
        }
    }

    /// The symmetric profile, detected from the table when needed.
    pub fn as_symmetric(&self) -> Option<SymmetricProfile> {
        match self {
            BoolFn::Table(t) => t.detect_symmetric(),
            BoolFn::Symmetric(s) => Some(s.clone()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum FunctionFile {
    Hex { n: u32, hex: String },
    Minterms { n: u32, minterms: Vec<u64> },
    Profile { n: u32, profile: Vec<u8> },
}

/// Parses the JSON function format: `{"n", "hex"}`, `{"n", "minterms"}` or
/// `{"n", "profile"}`.
pub fn parse_function(text: &str) -> Result<BoolFn> {
    let file: FunctionFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("function file: {e}")))?;
    match file {
        FunctionFile::Hex { n, hex } => TruthTable::from_hex(n, &hex).map(BoolFn::Table),
        FunctionFile::Minterms { n, minterms } => TruthTable::from_minterms(n, &minterms).map(BoolFn::Table),
        FunctionFile::Profile { n, profile } => {
            let out = profile
                .into_iter()
                .map(|b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Parse(format!("profile entry {other} is not a bit"))),
                })
                .collect::<Result<Vec<_>>>()?;
            SymmetricProfile::new(n, out).map(BoolFn::Symmetric)
        }
    }
}

/// Parses a truth table; profiles are expanded.
pub fn parse_truth_table(text: &str) -> Result<TruthTable> {
    parse_function(text)?.to_truth_table()
}

/// Canonical JSON form `{"n":..,"hex":".."}`.
pub fn serialize(table: &TruthTable) -> String {
    serde_json::to_string(&FunctionFile::Hex { n: table.n(), hex: table.to_hex() })
        .expect("plain struct serializes")
}

pub fn serialize_profile(profile: &SymmetricProfile) -> String {
    let bits = profile.out.iter().map(|&b| b as u8).collect();
    serde_json::to_string(&FunctionFile::Profile { n: profile.n, profile: bits })
        .expect("plain struct serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(t: &TruthTable) -> Vec<u8> {
        t.iter().map(|b| b as u8).collect()
    }

    #[test]
    fn dictator_examples() {
        assert_eq!(bits(&TruthTable::dictator(1, 1).unwrap()), vec![0, 1]);
        let d = TruthTable::dictator(3, 1).unwrap();
        assert_eq!(d.minterms(), vec![4, 5, 6, 7]);
        for n in 1..=10 {
            for i in 1..=n {
                assert_eq!(TruthTable::dictator(n, i).unwrap().weight(), FnWeight(1 << (n - 1)));
            }
        }
        assert!(TruthTable::dictator(3, 0).is_err());
        assert!(TruthTable::dictator(3, 4).is_err());
        assert!(TruthTable::dictator(27, 1).is_err());
    }

    #[test]
    fn majority_examples() {
        let m3 = SymmetricProfile::majority(3, TieRule::Ones).unwrap();
        assert_eq!(m3.out(), &[false, false, true, true]);
        let m4 = SymmetricProfile::majority(4, TieRule::Ones).unwrap();
        assert_eq!(m4.out(), &[false, false, true, true, true]);
        let m4z = SymmetricProfile::majority(4, TieRule::Zeros).unwrap();
        assert_eq!(m4z.out(), &[false, false, false, true, true]);
        let m5 = SymmetricProfile::majority(5, TieRule::Ones).unwrap();
        assert_eq!(m5.weight(), BigUint::from(16u32));
        for n in (1..=41).step_by(2) {
            let m = SymmetricProfile::majority(n, TieRule::Ones).unwrap();
            assert_eq!(m.weight(), BigUint::from(1u8) << (n as usize - 1));
        }
    }

    #[test]
    fn maj_q_examples() {
        for n in [1, 3, 5, 9] {
            assert_eq!(
                SymmetricProfile::maj_q(n, 0.5).unwrap(),
                SymmetricProfile::majority(n, TieRule::Ones).unwrap()
            );
        }
        let a = SymmetricProfile::maj_q(3, 1.0 / 8.0).unwrap();
        assert_eq!(a.out(), &[false, false, false, true]);
        let b = SymmetricProfile::maj_q(4, 5.0 / 16.0).unwrap();
        assert_eq!(b.out(), &[false, false, false, true, true]);
        assert_eq!(b.weight(), BigUint::from(5u32));
        assert!(SymmetricProfile::maj_q(4, 0.0).is_err());
        assert!(SymmetricProfile::maj_q(4, 1.0).is_err());
        assert!(SymmetricProfile::maj_q(4, f64::NAN).is_err());
    }

    #[test]
    fn cofactor_examples() {
        let d31 = TruthTable::dictator(3, 1).unwrap();
        assert_eq!(d31.cofactor(true).unwrap(), TruthTable::constant(2, true).unwrap());
        let d32 = TruthTable::dictator(3, 2).unwrap();
        assert_eq!(d32.cofactor(false).unwrap(), TruthTable::dictator(2, 1).unwrap());
        assert!(TruthTable::dictator(1, 1).unwrap().cofactor(false).is_err());
        // Word-aligned path.
        let p = TruthTable::parity(9).unwrap();
        assert_eq!(p.cofactor(false).unwrap(), TruthTable::parity(8).unwrap());
        assert_eq!(p.cofactor(true).unwrap(), TruthTable::parity(8).unwrap().complement());
    }

    #[test]
    fn detect_symmetric_examples() {
        let m5 = SymmetricProfile::majority(5, TieRule::Ones).unwrap();
        let recovered = m5.to_truth_table().unwrap().detect_symmetric().unwrap();
        assert_eq!(recovered.out(), &[false, false, false, true, true, true]);
        assert!(TruthTable::dictator(3, 1).unwrap().detect_symmetric().is_none());
        let p4 = TruthTable::parity(4).unwrap().detect_symmetric().unwrap();
        assert_eq!(p4.out(), &[false, true, false, true, false]);
    }

    #[test]
    fn hex_and_minterm_parsing() {
        let m3 = parse_truth_table(r#"{"n": 3, "hex": "E8"}"#).unwrap();
        let expected = SymmetricProfile::majority(3, TieRule::Ones).unwrap().to_truth_table().unwrap();
        assert_eq!(m3, expected);
        assert_eq!(serialize(&m3), r#"{"n":3,"hex":"E8"}"#);
        let d = parse_truth_table(r#"{"n": 3, "minterms": [4, 5, 6, 7]}"#).unwrap();
        assert_eq!(d, TruthTable::dictator(3, 1).unwrap());
        let lower = parse_truth_table(r#"{"n": 3, "hex": "e8"}"#).unwrap();
        assert_eq!(lower, m3);

        let bad = [
            r#"{"n": 3, "hex": "E"}"#,
            r#"{"n": 3, "hex": "G8"}"#,
            r#"{"n": 3, "minterms": [8]}"#,
            r#"{"n": 1, "hex": "4"}"#,
            r#"{"n": 0, "hex": "1"}"#,
            r#"{"hex": "E8"}"#,
            r#"{"n": 2, "profile": [0, 2, 1]}"#,
            "not json",
        ];
        for text in bad {
            assert!(
                matches!(parse_function(text), Err(Error::Parse(_)) | Err(Error::Arity { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn profile_file_roundtrip() {
        let p = SymmetricProfile::parity(4).unwrap();
        let text = serialize_profile(&p);
        assert_eq!(text, r#"{"n":4,"profile":[0,1,0,1,0]}"#);
        assert_eq!(parse_function(&text).unwrap(), BoolFn::Symmetric(p));
    }

    #[test]
    fn small_tables_use_single_word() {
        let t = TruthTable::constant(2, true).unwrap();
        assert_eq!(t.complement(), TruthTable::zeros(2).unwrap());
        assert_eq!(t.to_hex(), "F");
        assert_eq!(TruthTable::constant(1, true).unwrap().to_hex(), "3");
        assert_eq!(t.encoding(), BigUint::from(15u32));
    }

    #[test]
    fn permutation_and_flip() {
        let d1 = TruthTable::dictator(4, 1).unwrap();
        let d3 = TruthTable::dictator(4, 3).unwrap();
        // x_1 of the permuted input is sent to coordinate 3.
        assert_eq!(d3.permute_inputs(&[2, 1, 0, 3]).unwrap(), d1);
        assert!(d1.permute_inputs(&[0, 0, 1, 2]).is_err());
        assert_eq!(d1.flip_inputs(0b1000), d1.complement());
    }

    fn table_strategy() -> impl Strategy<Value = TruthTable> {
        (1u32..=10).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), 1usize << n)
                .prop_map(move |b| TruthTable::from_bits(n, &b).unwrap())
        })
    }

    proptest! {
        #[test]
        fn serialize_roundtrip(t in table_strategy()) {
            prop_assert_eq!(parse_truth_table(&serialize(&t)).unwrap(), t.clone());
            let via_minterms = TruthTable::from_minterms(t.n(), &t.minterms()).unwrap();
            prop_assert_eq!(via_minterms, t);
        }

        #[test]
        fn cofactor_weights_partition(t in table_strategy().prop_filter("n >= 2", |t| t.n() >= 2)) {
            let w0 = t.cofactor(false).unwrap().weight().0;
            let w1 = t.cofactor(true).unwrap().weight().0;
            prop_assert_eq!(w0 + w1, t.weight().0);
            let rebuilt = TruthTable::from_cofactors(&t.cofactor(false).unwrap(), &t.cofactor(true).unwrap()).unwrap();
            prop_assert_eq!(rebuilt, t);
        }

        #[test]
        fn complement_weight(t in table_strategy()) {
            prop_assert_eq!(t.complement().weight().0, t.len() as u64 - t.weight().0);
        }

        #[test]
        fn profile_expansion_roundtrip(n in 1u32..=12, seed in any::<u64>()) {
            let out: Vec<bool> = (0..=n).map(|w| (seed >> (w % 64)) & 1 == 1).collect();
            let p = SymmetricProfile::new(n, out).unwrap();
            let t = p.to_truth_table().unwrap();
            prop_assert_eq!(t.detect_symmetric().unwrap(), p.clone());
            prop_assert_eq!(BigUint::from(t.weight().0), p.weight());
        }
    }
}

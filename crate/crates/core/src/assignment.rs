//! Assignments, overlap arithmetic and pair profiles.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{EcError, Result};
use crate::instance::{EcInstance, Var};

/// A Boolean valuation of `n` variables. Ordering is lexicographic with
/// variable 0 most significant, which matches the bit-string order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment { values }
    }

    pub fn all(n: usize, value: bool) -> Self {
        Assignment { values: vec![value; n] }
    }

    /// Parses a string of `0`/`1` characters, variable 0 first.
    pub fn from_bits(bits: &str) -> Result<Self> {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(EcError::invalid(format!("bad bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Assignment::new)
    }

    /// Bit `v` of `mask` is the value of variable `v`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Assignment::new((0..n).map(|v| mask >> v & 1 == 1).collect())
    }

    /// `None` when `n > 64`.
    pub fn to_mask(&self) -> Option<u64> {
        if self.values.len() > 64 {
            return None;
        }
        Some(
            self.values
                .iter()
                .enumerate()
                .fold(0u64, |m, (v, &b)| m | (b as u64) << v),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: Var) -> bool {
        self.values[v as usize]
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v as usize] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Assignment::new(self.values.iter().map(|b| !b).collect())
    }

    pub fn to_bit_string(&self) -> String {
        self.values.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({})", self.to_bit_string())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

fn check_lengths(a: &Assignment, b: &Assignment) -> Result<()> {
    if a.len() != b.len() {
        return Err(EcError::invalid(format!(
            "assignment lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Hamming distance between two assignments of equal length.
pub fn hamming(a: &Assignment, b: &Assignment) -> Result<usize> {
    check_lengths(a, b)?;
    Ok(a.values.iter().zip(&b.values).filter(|(x, y)| x != y).count())
}

/// `(overlap, hamming)` where `overlap = 1 - hamming / n`.
pub fn overlap_and_distance(a: &Assignment, b: &Assignment) -> Result<(f64, usize)> {
    let d = hamming(a, b)?;
    let n = a.len();
    if n == 0 {
        return Err(EcError::invalid("overlap of empty assignments"));
    }
    Ok((1.0 - d as f64 / n as f64, d))
}

/// True iff every clause has exactly one TRUE variable under `a`.
pub fn satisfies(a: &Assignment, inst: &EcInstance) -> Result<bool> {
    if a.len() != inst.n() {
        return Err(EcError::invalid(format!(
            "assignment has {} values, instance has n={}",
            a.len(),
            inst.n()
        )));
    }
    Ok(inst.clauses().all(|c| clause_satisfied(c, a)))
}

pub(crate) fn clause_satisfied(clause: &[Var], a: &Assignment) -> bool {
    clause.iter().filter(|&&v| a.get(v)).count() == 1
}

/// Counts of clause variables in the classes A=B=0, (A=0,B=1), (A=1,B=0), A=B=1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClausePairProfile {
    pub c0: usize,
    pub c1: usize,
    pub c2: usize,
    pub c3: usize,
}

impl ClausePairProfile {
    pub fn width(&self) -> usize {
        self.c0 + self.c1 + self.c2 + self.c3
    }

    /// Both assignments satisfy the clause iff the profile is
    /// `(k-2, 1, 1, 0)` or `(k-1, 0, 0, 1)`.
    pub fn both_satisfied(&self) -> bool {
        let k = self.width();
        (self.c0 + 2 == k && self.c1 == 1 && self.c2 == 1 && self.c3 == 0)
            || (self.c0 + 1 == k && self.c1 == 0 && self.c2 == 0 && self.c3 == 1)
    }
}

pub fn clause_pair_profile(
    clause: &[Var],
    a: &Assignment,
    b: &Assignment,
) -> Result<(ClausePairProfile, bool)> {
    check_lengths(a, b)?;
    let mut p = ClausePairProfile { c0: 0, c1: 0, c2: 0, c3: 0 };
    for &v in clause {
        if v as usize >= a.len() {
            return Err(EcError::invalid(format!("variable {v} outside assignment")));
        }
        match (a.get(v), b.get(v)) {
            (false, false) => p.c0 += 1,
            (false, true) => p.c1 += 1,
            (true, false) => p.c2 += 1,
            (true, true) => p.c3 += 1,
        }
    }
    Ok((p, p.both_satisfied()))
}

/// Sizes of the four agreement classes over all variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GlobalPairProfile {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl GlobalPairProfile {
    pub fn n(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    pub fn agreements(&self) -> usize {
        self.a + self.d
    }
}

pub fn global_pair_profile(a: &Assignment, b: &Assignment) -> Result<GlobalPairProfile> {
    check_lengths(a, b)?;
    let mut p = GlobalPairProfile { a: 0, b: 0, c: 0, d: 0 };
    for (&x, &y) in a.values.iter().zip(&b.values) {
        match (x, y) {
            (false, false) => p.a += 1,
            (false, true) => p.b += 1,
            (true, false) => p.c += 1,
            (true, true) => p.d += 1,
        }
    }
    Ok(p)
}

/// Default exponent in `epsilon(n) = n^exponent`.
pub const DEFAULT_EPSILON_EXPONENT: f64 = 0.75;

/// Overlap window `[q - epsilon_n / n, q + epsilon_n / n]` clipped to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapWindow {
    pub q: f64,
    pub epsilon_n: f64,
}

impl OverlapWindow {
    pub fn new(q: f64, epsilon_n: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(EcError::invalid(format!("overlap target q={q} outside [0,1]")));
        }
        if !(epsilon_n >= 0.0) || !epsilon_n.is_finite() {
            return Err(EcError::invalid(format!("epsilon(n)={epsilon_n} must be finite and >= 0")));
        }
        Ok(OverlapWindow { q, epsilon_n })
    }

    /// `epsilon(n) = n^{3/4}`.
    pub fn with_default_epsilon(q: f64, n: usize) -> Result<Self> {
        Self::with_exponent(q, n, DEFAULT_EPSILON_EXPONENT)
    }

    pub fn with_exponent(q: f64, n: usize, exponent: f64) -> Result<Self> {
        Self::new(q, (n as f64).powf(exponent))
    }

    /// Window given as a half-width on the overlap scale, `epsilon_n = half_width * n`.
    pub fn with_half_width(q: f64, n: usize, half_width: f64) -> Result<Self> {
        Self::new(q, half_width * n as f64)
    }

    pub fn bounds(&self, n: usize) -> (f64, f64) {
        let h = self.epsilon_n / n as f64;
        ((self.q - h).max(0.0), (self.q + h).min(1.0))
    }

    fn slack(n: usize) -> f64 {
        1e-9 * (n.max(1) as f64)
    }

    /// Whether `agreements / n` lies in the window. Compared on the count
    /// scale so that exact rationals such as 1/3 are not lost to rounding.
    pub fn contains_agreements(&self, agreements: usize, n: usize) -> bool {
        (agreements as f64 - self.q * n as f64).abs() <= self.epsilon_n + Self::slack(n)
    }

    pub fn contains(&self, overlap: f64, n: usize) -> bool {
        (overlap - self.q).abs() * n as f64 <= self.epsilon_n + Self::slack(n)
    }

    /// Inclusive range of agreement counts inside the window, or `None` if empty.
    pub fn agreement_range(&self, n: usize) -> Option<(usize, usize)> {
        let centre = self.q * n as f64;
        let w = self.epsilon_n + Self::slack(n);
        let lo = (centre - w).ceil().max(0.0);
        let hi = (centre + w).floor().min(n as f64);
        (lo <= hi).then_some((lo as usize, hi as usize))
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn overlap_matches_global_profile(a in proptest::collection::vec(any::<bool>(), 1..80),
                                          seed in any::<u64>()) {
            let n = a.len();
            let b: Vec<bool> = (0..n).map(|i| ((seed >> (i % 64)) & 1 == 1) ^ (i % 3 == 0)).collect();
            let a = Assignment::new(a);
            let b = Assignment::new(b);
            let (o, d) = overlap_and_distance(&a, &b).unwrap();
            let p = global_pair_profile(&a, &b).unwrap();
            prop_assert_eq!(p.n(), n);
            prop_assert_eq!(p.b + p.c, d);
            prop_assert!((o - p.agreements() as f64 / n as f64).abs() < 1e-12);
        }
    }
}

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;

use super::enumerate::{enumerate_solutions, EnumerationLimits, SolutionSet};
use crate::assignment::OverlapWindow;
use crate::error::Result;
use crate::instance::EcInstance;

/// Largest `n` for which the transform route allocates `2^n` cells.
const MAX_TRANSFORM_VARS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HistogramMethod {
    Pairwise,
    Transform,
    Auto,
}

/// `counts[d]` is the number of ordered pairs `(A, B)` of solutions,
/// including `A = B`, at Hamming distance `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceHistogram {
    pub n: usize,
    pub solutions: u64,
    pub counts: Vec<u64>,
}

impl DistanceHistogram {
    pub fn of(set: &SolutionSet, method: HistogramMethod) -> Self {
        Self::of_masks(set.masks(), set.n(), method)
    }

    pub fn of_masks(masks: &[u64], n: usize, method: HistogramMethod) -> Self {
        let s = masks.len() as f64;
        let method = match method {
            HistogramMethod::Auto if n <= MAX_TRANSFORM_VARS && s * s > 4.0 * (n as f64 + 1.0) * (1u64 << n) as f64 => {
                HistogramMethod::Transform
            }
            HistogramMethod::Auto => HistogramMethod::Pairwise,
            m => m,
        };
        let counts = match method {
            HistogramMethod::Transform if n <= MAX_TRANSFORM_VARS => transform_counts(masks, n),
            _ => pairwise_counts(masks, n),
        };
        DistanceHistogram {
            n,
            solutions: masks.len() as u64,
            counts,
        }
    }

    /// Ordered pairs whose overlap lies in `window`.
    pub fn count_in_window(&self, window: &OverlapWindow, include_equal: bool) -> u64 {
        let mut total = 0;
        for (d, &c) in self.counts.iter().enumerate() {
            if window.contains_agreements(self.n - d, self.n) {
                total += c;
            }
        }
        if !include_equal && window.contains_agreements(self.n, self.n) {
            total -= self.solutions;
        }
        total
    }

    /// Largest distance realized by some pair, `None` when empty.
    pub fn diameter(&self) -> Option<usize> {
        self.counts.iter().rposition(|&c| c > 0)
    }

    /// Overlaps of distinct pairs as reduced fractions.
    pub fn support(&self) -> BTreeSet<Ratio<u64>> {
        let n = self.n as u64;
        self.counts
            .iter()
            .enumerate()
            .filter(|&(d, &c)| if d == 0 { c > self.solutions } else { c > 0 })
            .map(|(d, _)| Ratio::new(n - d as u64, n))
            .collect()
    }
}

fn pairwise_counts(masks: &[u64], n: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n + 1];
    counts[0] = masks.len() as u64;
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            counts[(a ^ b).count_ones() as usize] += 2;
        }
    }
    counts
}

/// Autocorrelation of the solution indicator through the Walsh-Hadamard
/// transform: `corr = H(H(f)^2) / 2^n`.
fn transform_counts(masks: &[u64], n: usize) -> Vec<u64> {
    let size = 1usize << n;
    let mut f = vec![0i128; size];
    for &m in masks {
        f[m as usize] += 1;
    }
    walsh_hadamard(&mut f);
    for x in f.iter_mut() {
        *x *= *x;
    }
    walsh_hadamard(&mut f);
    let mut counts = vec![0u64; n + 1];
    for (x, &v) in f.iter().enumerate() {
        counts[x.count_ones() as usize] += (v >> n) as u64;
    }
    counts
}

fn walsh_hadamard(f: &mut [i128]) {
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        h *= 2;
    }
}

/// Number of ordered solution pairs with overlap in `window`.
pub fn count_overlap_pairs(
    inst: &EcInstance,
    window: &OverlapWindow,
    include_equal: bool,
    limits: &EnumerationLimits,
) -> Result<u64> {
    let set = enumerate_solutions(inst, limits)?;
    Ok(DistanceHistogram::of(&set, HistogramMethod::Auto).count_in_window(window, include_equal))
}

/// `{ overlap(A, B) : A != B solutions }` as exact fractions.
pub fn overlap_support(inst: &EcInstance, limits: &EnumerationLimits) -> Result<BTreeSet<Ratio<u64>>> {
    let set = enumerate_solutions(inst, limits)?;
    Ok(DistanceHistogram::of(&set, HistogramMethod::Auto).support())
}

/// `p/q` with the fraction reduced, e.g. `0/1`, `1/2`.
pub fn format_ratio(r: &Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::generate_instance;
    use crate::rng::RngSpec;

    fn limits() -> EnumerationLimits {
        EnumerationLimits::default()
    }

    fn single() -> EcInstance {
        EcInstance::from_one_based(3, 3, &[[1, 2, 3]]).unwrap()
    }

    #[test]
    fn single_clause_pairs() {
        let w = OverlapWindow::new(1.0 / 3.0, 0.0).unwrap();
        assert_eq!(count_overlap_pairs(&single(), &w, false, &limits()).unwrap(), 6);
        assert_eq!(count_overlap_pairs(&single(), &w, true, &limits()).unwrap(), 6);
        let w = OverlapWindow::new(1.0, 0.0).unwrap();
        assert_eq!(count_overlap_pairs(&single(), &w, true, &limits()).unwrap(), 3);
        assert_eq!(count_overlap_pairs(&single(), &w, false, &limits()).unwrap(), 0);
        let w = OverlapWindow::new(0.0, 0.5).unwrap();
        assert_eq!(count_overlap_pairs(&single(), &w, true, &limits()).unwrap(), 0);
    }

    #[test]
    fn support_examples() {
        let s: Vec<String> = overlap_support(&single(), &limits()).unwrap().iter().map(format_ratio).collect();
        assert_eq!(s, ["1/3"]);
        let empty = EcInstance::new::<[usize; 3]>(2, 3, &[]).unwrap();
        let s: Vec<String> = overlap_support(&empty, &limits()).unwrap().iter().map(format_ratio).collect();
        assert_eq!(s, ["0/1", "1/2"]);
        // All four triples over four variables: unsatisfiable.
        let unsat = EcInstance::from_one_based(
            4,
            3,
            &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]],
        )
        .unwrap();
        assert!(overlap_support(&unsat, &limits()).unwrap().is_empty());
    }

    #[test]
    fn transform_matches_pairwise() {
        for seed in 0..40 {
            let n = 4 + seed as usize % 12;
            let inst = generate_instance(n, seed as usize % 5, 3, &RngSpec::new(seed, 1)).unwrap();
            let set = enumerate_solutions(&inst, &limits()).unwrap();
            let a = DistanceHistogram::of(&set, HistogramMethod::Pairwise);
            let b = DistanceHistogram::of(&set, HistogramMethod::Transform);
            assert_eq!(a, b, "seed {seed}");
            assert_eq!(a.counts.iter().sum::<u64>(), (set.len() * set.len()) as u64);
        }
    }
}

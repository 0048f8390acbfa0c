use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{enumerate_solutions, EnumerationLimits};
use super::pairs::{DistanceHistogram, HistogramMethod};
use crate::assignment::OverlapWindow;
use crate::combinatorics::{log_add_exp, LnFactorials};
use crate::error::{EcError, Result};
use crate::instance::generate_instance;
use crate::rng::RngSpec;
use crate::upper::pstar_exact;

pub const MAX_EXPECTED_Z_VARS: usize = 200;

/// Exact expected number of ordered solution pairs (equal pairs included)
/// with overlap in a window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectedZ {
    pub ln_value: f64,
    pub value: f64,
    /// Admissible `(a, b, c, d)` profiles that were summed.
    pub quadruples: u64,
    /// `(#agreement levels) * max_s (s+1)(n-s+1)`, a bound on `quadruples`.
    pub m_bound: u64,
}

/// `sum over a+b+c+d = n, (a+d)/n in window of n!/(a!b!c!d!) * P*(a,b,c,d)^m`.
pub fn expected_z(n: usize, m: usize, k: usize, window: &OverlapWindow) -> Result<ExpectedZ> {
    if n > MAX_EXPECTED_Z_VARS {
        return Err(EcError::ResourceLimit(format!(
            "expected_z supports n <= {MAX_EXPECTED_Z_VARS}, got {n}"
        )));
    }
    if k < 3 || k > n {
        return Err(EcError::invalid(format!("need 3 <= k <= n, got k={k}, n={n}")));
    }
    let fact = LnFactorials::new(n);
    let mut ln_sum = f64::NEG_INFINITY;
    let mut quadruples = 0u64;
    let mut levels = 0u64;
    let mut widest = 0u64;
    if let Some((lo, hi)) = window.agreement_range(n) {
        for s in lo..=hi {
            levels += 1;
            widest = widest.max(((s + 1) * (n - s + 1)) as u64);
            for a in 0..=s {
                let d = s - a;
                for b in 0..=(n - s) {
                    let c = n - s - b;
                    quadruples += 1;
                    let p = pstar_exact(a, b, c, d, n, k)?;
                    let term = if m == 0 {
                        0.0
                    } else if p.ln == f64::NEG_INFINITY {
                        continue;
                    } else {
                        m as f64 * p.ln
                    };
                    ln_sum = log_add_exp(ln_sum, fact.ln_multinomial(&[a, b, c, d]) + term);
                }
            }
        }
    }
    Ok(ExpectedZ {
        ln_value: ln_sum,
        value: ln_sum.exp(),
        quadruples,
        m_bound: levels * widest,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Mean of the enumerated ordered pair count (equal pairs included) over
/// `samples` random instances; sample `i` draws its instance from
/// `rng.child(i)`.
pub fn monte_carlo_pair_count(
    n: usize,
    m: usize,
    k: usize,
    window: &OverlapWindow,
    samples: usize,
    rng: &RngSpec,
) -> Result<MonteCarloEstimate> {
    let limits = EnumerationLimits::default();
    let counts: Vec<u64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let inst = generate_instance(n, m, k, &rng.child(i as u64))?;
            let set = enumerate_solutions(&inst, &limits)?;
            Ok(DistanceHistogram::of(&set, HistogramMethod::Auto).count_in_window(window, true))
        })
        .collect::<Result<_>>()?;
    let len = counts.len().max(1) as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / len;
    let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (len - 1.0).max(1.0);
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var / len).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::binomial_u128;
    use crate::instance::EcInstance;
    use crate::oracle::count_overlap_pairs;

    #[test]
    fn three_variables_one_clause() {
        let w = OverlapWindow::new(1.0 / 3.0, 0.0).unwrap();
        let z = expected_z(3, 1, 3, &w).unwrap();
        assert!((z.value - 6.0).abs() < 1e-12);
        let inst = EcInstance::from_one_based(3, 3, &[[1, 2, 3]]).unwrap();
        let direct = count_overlap_pairs(&inst, &w, true, &EnumerationLimits::default()).unwrap();
        assert_eq!(direct, 6);
    }

    #[test]
    fn no_clauses_counts_all_pairs() {
        // With m = 0 every pair counts: sum over s in window of C(n,s) 2^n.
        let n = 12;
        let w = OverlapWindow::with_half_width(0.5, n, 0.1).unwrap();
        let z = expected_z(n, 0, 3, &w).unwrap();
        let (lo, hi) = w.agreement_range(n).unwrap();
        let want: u128 = (lo..=hi).map(|s| binomial_u128(n as u64, s as u64).unwrap() << n).sum();
        assert!((z.value / want as f64 - 1.0).abs() < 1e-12);
        assert!(z.quadruples <= z.m_bound);
    }

    #[test]
    fn small_case_matches_exhaustive_average() {
        // n = 5, m = 1: average over all C(5,3) = 10 clauses is exact.
        let w = OverlapWindow::with_half_width(0.4, 5, 0.25).unwrap();
        let z = expected_z(5, 1, 3, &w).unwrap();
        let mut total = 0u64;
        let mut count = 0u64;
        for a in 0..5 {
            for b in a + 1..5 {
                for c in b + 1..5 {
                    let inst = EcInstance::new(5, 3, &[[a, b, c]]).unwrap();
                    total += count_overlap_pairs(&inst, &w, true, &EnumerationLimits::default()).unwrap();
                    count += 1;
                }
            }
        }
        assert!((z.value - total as f64 / count as f64).abs() < 1e-9);
    }

    #[test]
    fn refuses_large_n() {
        let w = OverlapWindow::new(0.5, 1.0).unwrap();
        assert!(matches!(expected_z(201, 1, 3, &w), Err(EcError::ResourceLimit(_))));
    }
}

use serde::{Deserialize, Serialize};

use super::{FailReason, Outcome};
use crate::assignment::{Assignment, OverlapWindow};
use crate::instance::Var;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TuneMethod {
    /// Largest components first, skipping any that would overshoot.
    Greedy,
    /// Exact subset sum over component sizes, used when greedy misses.
    SubsetSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunedPair {
    pub a: Assignment,
    pub b: Assignment,
    /// Indices into the run's component list that were copied from A to B.
    pub flipped: Vec<usize>,
    pub agreements: usize,
    pub overlap: f64,
    pub method: TuneMethod,
}

/// Raises the overlap of a raw pair into `window` by copying whole
/// endgame components from A into B. Each component is a connected piece
/// of the disequality graph, so B stays satisfying.
pub fn tune_overlap(outcome: &Outcome, window: &OverlapWindow) -> Result<TunedPair, FailReason> {
    let Outcome::Pair { a, b, components } = outcome else {
        panic!("tune_overlap needs a Pair outcome");
    };
    let n = a.len();
    let moved: usize = components.iter().map(Vec::len).sum();
    let raw = n - moved;
    let unreachable = |lo, hi| FailReason::WindowUnreachable { agreements: raw, lo, hi };
    let Some((lo, hi)) = window.agreement_range(n) else {
        return Err(unreachable(1, 0));
    };
    if raw > hi {
        return Err(unreachable(lo, hi));
    }
    let mut order: Vec<usize> = (0..components.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(components[i].len()), components[i][0]));

    let mut flipped = Vec::new();
    let mut cur = raw;
    for &i in &order {
        if cur >= lo {
            break;
        }
        if cur + components[i].len() <= hi {
            cur += components[i].len();
            flipped.push(i);
        }
    }
    let method = if (lo..=hi).contains(&cur) {
        TuneMethod::Greedy
    } else {
        flipped = subset_sum(components, lo - raw, hi - raw).ok_or_else(|| unreachable(lo, hi))?;
        cur = raw + flipped.iter().map(|&i| components[i].len()).sum::<usize>();
        TuneMethod::SubsetSum
    };
    flipped.sort_unstable();
    let mut b2 = b.clone();
    for &i in &flipped {
        for &v in &components[i] {
            b2.set(v as Var, a.get(v));
        }
    }
    Ok(TunedPair {
        a: a.clone(),
        b: b2,
        flipped,
        agreements: cur,
        overlap: cur as f64 / n as f64,
        method,
    })
}

/// Components whose sizes sum into `[lo, hi]`, grouped by size so the
/// table is `O(distinct sizes * hi)`.
fn subset_sum(components: &[Vec<Var>], lo: usize, hi: usize) -> Option<Vec<usize>> {
    let mut by_size: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, c) in components.iter().enumerate() {
        by_size.entry(c.len()).or_default().push(i);
    }
    let groups: Vec<(usize, Vec<usize>)> = by_size.into_iter().collect();
    // used[g][s]: copies of group g's size in the first way found to reach s
    // using groups 0..=g; u32::MAX marks unreachable.
    const NO: u32 = u32::MAX;
    let mut used: Vec<Vec<u32>> = Vec::with_capacity(groups.len());
    let mut reach = vec![false; hi + 1];
    reach[0] = true;
    for (size, members) in &groups {
        let mut row = vec![NO; hi + 1];
        for s in 0..=hi {
            if reach[s] {
                row[s] = 0;
            } else if s >= *size && row[s - size] != NO && (row[s - size] as usize) < members.len() {
                row[s] = row[s - size] + 1;
            }
        }
        for s in 0..=hi {
            reach[s] = row[s] != NO;
        }
        used.push(row);
    }
    let mut s = (lo..=hi).find(|&s| reach[s])?;
    let mut picked = Vec::new();
    for g in (0..groups.len()).rev() {
        let c = used[g][s] as usize;
        picked.extend_from_slice(&groups[g].1[..c]);
        s -= c * groups[g].0;
    }
    debug_assert_eq!(s, 0);
    Some(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(n: usize, sizes: &[usize]) -> Outcome {
        let mut components = Vec::new();
        let mut next = 0;
        for &s in sizes {
            components.push((next..next + s).map(|v| v as Var).collect::<Vec<_>>());
            next += s;
        }
        let a = Assignment::new((0..n).map(|v| v % 2 == 0).collect());
        let mut b = a.clone();
        for v in 0..next {
            b.set(v as Var, !a.get(v as Var));
        }
        Outcome::Pair { a, b, components }
    }

    #[test]
    fn full_and_zero_flips() {
        let p = pair(20, &[3, 2, 5]);
        let t = tune_overlap(&p, &OverlapWindow::new(1.0, 0.0).unwrap()).unwrap();
        assert_eq!(t.a, t.b);
        assert_eq!(t.flipped, vec![0, 1, 2]);
        let t = tune_overlap(&p, &OverlapWindow::new(0.5, 0.0).unwrap()).unwrap();
        assert!(t.flipped.is_empty());
        assert_eq!(t.agreements, 10);
    }

    #[test]
    fn needs_subset_sum() {
        // Raw overlap 0; target 5 agreements from sizes {2,2,3,3}. Greedy
        // takes a 3, then cannot add another 3 or stop at 5 without a 2.
        let p = pair(10, &[2, 2, 3, 3]);
        let t = tune_overlap(&p, &OverlapWindow::new(0.5, 0.0).unwrap()).unwrap();
        assert_eq!(t.agreements, 5);
        if let Outcome::Pair { components, .. } = &p {
            let mut sizes: Vec<usize> = t.flipped.iter().map(|&i| components[i].len()).collect();
            sizes.sort();
            assert_eq!(sizes, [2, 3]);
        }
        assert_eq!(crate::assignment::hamming(&t.a, &t.b).unwrap(), 5);
    }

    #[test]
    fn subset_sum_fallback() {
        // Greedy takes 4 and then cannot land on 6 with the 3s.
        let p = pair(12, &[4, 3, 3]);
        let t = tune_overlap(&p, &OverlapWindow::new(8.0 / 12.0, 0.0).unwrap()).unwrap();
        assert_eq!(t.method, TuneMethod::SubsetSum);
        assert_eq!(t.agreements, 8);
    }

    #[test]
    fn unreachable_targets() {
        let p = pair(10, &[3, 3]);
        let below = tune_overlap(&p, &OverlapWindow::new(0.1, 0.0).unwrap());
        assert!(matches!(below, Err(FailReason::WindowUnreachable { agreements: 4, .. })));
        let gap = tune_overlap(&p, &OverlapWindow::new(0.5, 0.0).unwrap());
        assert!(gap.is_err());
    }
}

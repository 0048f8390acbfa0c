use serde::Serialize;

use super::enumerate::SolutionSet;
use super::pairs::{DistanceHistogram, HistogramMethod};
use crate::assignment::{satisfies, Assignment};
use crate::dsu::Dsu;
use crate::error::{EcError, Result};
use crate::instance::{EcInstance, Var};

/// Components of the graph on solutions joined at Hamming distance `<= l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterReport {
    pub l: usize,
    /// Solution indices per component, each sorted, components ordered by
    /// their smallest index.
    pub components: Vec<Vec<usize>>,
    /// Largest pairwise distance inside each component.
    pub diameters: Vec<usize>,
}

impl ClusterReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }
}

fn binomial_f64(n: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Calls `f` with every mask at distance `1..=l` from `center`.
fn for_each_in_ball(center: u64, n: usize, l: usize, f: &mut impl FnMut(u64)) {
    fn rec(x: u64, start: usize, left: usize, n: usize, f: &mut impl FnMut(u64)) {
        for b in start..n {
            let y = x ^ (1u64 << b);
            f(y);
            if left > 1 {
                rec(y, b + 1, left - 1, n, f);
            }
        }
    }
    if l > 0 {
        rec(center, 0, l, n, f);
    }
}

pub fn cluster_decomposition(sols: &SolutionSet, l: usize) -> ClusterReport {
    let masks = sols.masks();
    let s = masks.len();
    let n = sols.n();
    let components = if s == 0 {
        Vec::new()
    } else if l == 0 {
        (0..s).map(|i| vec![i]).collect()
    } else if l >= n {
        vec![(0..s).collect()]
    } else {
        let ball: f64 = (1..=l).map(|j| binomial_f64(n, j)).sum();
        if ball * (s as f64) < (s as f64) * (s as f64) / 2.0 {
            components_by_ball(masks, n, l)
        } else {
            components_by_scan(masks, l)
        }
    };
    let diameters = components
        .iter()
        .map(|c| {
            let sub: Vec<u64> = c.iter().map(|&i| masks[i]).collect();
            DistanceHistogram::of_masks(&sub, n, HistogramMethod::Auto)
                .diameter()
                .unwrap_or(0)
        })
        .collect();
    ClusterReport { l, components, diameters }
}

fn components_by_ball(masks: &[u64], n: usize, l: usize) -> Vec<Vec<usize>> {
    let index: std::collections::HashMap<u64, usize> =
        masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut dsu = Dsu::new(masks.len());
    for (i, &m) in masks.iter().enumerate() {
        for_each_in_ball(m, n, l, &mut |y| {
            if let Some(&j) = index.get(&y) {
                dsu.union(i, j);
            }
        });
    }
    dsu.groups()
}

/// BFS that removes newly reached solutions from an unvisited list, so a
/// dense single cluster costs far fewer than `s^2` comparisons.
fn components_by_scan(masks: &[u64], l: usize) -> Vec<Vec<usize>> {
    let mut unvisited: Vec<usize> = (0..masks.len()).rev().collect();
    let mut components = Vec::new();
    while let Some(root) = unvisited.pop() {
        let mut comp = vec![root];
        let mut head = 0;
        while head < comp.len() {
            let x = masks[comp[head]];
            head += 1;
            let mut i = 0;
            while i < unvisited.len() {
                if ((x ^ masks[unvisited[i]]).count_ones() as usize) <= l {
                    comp.push(unvisited.swap_remove(i));
                } else {
                    i += 1;
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components.sort_unstable_by_key(|c| c[0]);
    components
}

/// Connected components of the formula hypergraph, including variables
/// outside every clause as singletons. Ordered by smallest variable.
pub fn hypergraph_components(inst: &EcInstance) -> Vec<Vec<Var>> {
    let mut dsu = Dsu::new(inst.n());
    for clause in inst.clauses() {
        for w in clause.windows(2) {
            dsu.union(w[0] as usize, w[1] as usize);
        }
    }
    dsu.groups()
        .into_iter()
        .map(|g| g.into_iter().map(|v| v as Var).collect())
        .collect()
}

/// `A = A_0, ..., A_s = B`, switching one hypergraph component from A's
/// values to B's at each step.
pub fn build_solution_path(a: &Assignment, b: &Assignment, inst: &EcInstance) -> Result<Vec<Assignment>> {
    for (name, x) in [("A", a), ("B", b)] {
        if !satisfies(x, inst)? {
            return Err(EcError::invalid(format!("{name} does not satisfy the instance")));
        }
    }
    let mut path = vec![a.clone()];
    let mut cur = a.clone();
    for comp in hypergraph_components(inst) {
        if comp.iter().any(|&v| cur.get(v) != b.get(v)) {
            for &v in &comp {
                cur.set(v, b.get(v));
            }
            path.push(cur.clone());
        }
    }
    Ok(path)
}

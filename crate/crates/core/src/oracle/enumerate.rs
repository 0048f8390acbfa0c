use serde::Serialize;

use crate::assignment::Assignment;
use crate::error::{EcError, Result};
use crate::instance::{EcInstance, Var};

pub const DEFAULT_MAX_VARS: usize = 30;

/// Hard caps for exhaustive enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationLimits {
    pub max_vars: usize,
    pub max_solutions: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_vars: DEFAULT_MAX_VARS,
            max_solutions: 1 << 24,
        }
    }
}

/// All satisfying assignments of one instance, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSet {
    n: usize,
    instance_fingerprint: u64,
    masks: Vec<u64>,
}

impl SolutionSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    /// Fingerprint of the enumerated instance.
    pub fn instance_fingerprint(&self) -> u64 {
        self.instance_fingerprint
    }

    /// Bit `v` of each mask is the value of variable `v`.
    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn get(&self, i: usize) -> Assignment {
        Assignment::from_mask(self.masks[i], self.n)
    }

    pub fn solutions(&self) -> Vec<Assignment> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn bit_strings(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.get(i).to_bit_string()).collect()
    }
}

struct Search<'a> {
    inst: &'a EcInstance,
    occ: Vec<Vec<usize>>,
    ones: Vec<u32>,
    open: Vec<u32>,
    value: Vec<Option<bool>>,
    trail: Vec<Var>,
    max_solutions: usize,
    out: Vec<u64>,
}

impl Search<'_> {
    /// Records `v = val` and updates clause counters; false on an
    /// immediately violated clause. Counters are updated either way so
    /// that `undo` stays symmetric.
    fn assign(&mut self, v: Var, val: bool) -> bool {
        self.value[v as usize] = Some(val);
        self.trail.push(v);
        let mut ok = true;
        for &c in &self.occ[v as usize] {
            self.open[c] -= 1;
            if val {
                self.ones[c] += 1;
            }
            if self.ones[c] > 1 || (self.ones[c] == 0 && self.open[c] == 0) {
                ok = false;
            }
        }
        ok
    }

    fn undo(&mut self, to: usize) {
        while self.trail.len() > to {
            let v = self.trail.pop().unwrap();
            let val = self.value[v as usize].take().unwrap();
            for &c in &self.occ[v as usize] {
                self.open[c] += 1;
                if val {
                    self.ones[c] -= 1;
                }
            }
        }
    }

    /// Unit propagation over the trail suffix starting at `from`.
    fn propagate(&mut self, from: usize) -> bool {
        let mut head = from;
        while head < self.trail.len() {
            let v = self.trail[head];
            head += 1;
            for ci in 0..self.occ[v as usize].len() {
                let c = self.occ[v as usize][ci];
                let forced = match (self.ones[c], self.open[c]) {
                    (1, o) if o > 0 => false,
                    (0, 1) => true,
                    _ => continue,
                };
                for j in 0..self.inst.k() {
                    let w = self.inst.clause(c)[j];
                    if self.value[w as usize].is_none() && !self.assign(w, forced) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn solve(&mut self, mut next: usize) -> Result<()> {
        let n = self.inst.n();
        while next < n && self.value[next].is_some() {
            next += 1;
        }
        if next == n {
            if self.out.len() >= self.max_solutions {
                return Err(EcError::ResourceLimit(format!(
                    "more than {} solutions",
                    self.max_solutions
                )));
            }
            let mask = self
                .value
                .iter()
                .enumerate()
                .fold(0u64, |m, (v, b)| m | (b.unwrap() as u64) << v);
            self.out.push(mask);
            return Ok(());
        }
        for val in [false, true] {
            let mark = self.trail.len();
            if self.assign(next as Var, val) && self.propagate(mark) {
                self.solve(next + 1)?;
            }
            self.undo(mark);
        }
        Ok(())
    }
}

/// Backtracking with unit propagation on the 1-in-j residual clauses.
/// Variables are branched in index order, FALSE first, so the output is
/// lexicographic.
pub fn enumerate_solutions(inst: &EcInstance, limits: &EnumerationLimits) -> Result<SolutionSet> {
    let n = inst.n();
    if n > limits.max_vars || n > 64 {
        return Err(EcError::ResourceLimit(format!(
            "n={n} exceeds the enumeration cap of {}",
            limits.max_vars.min(64)
        )));
    }
    let mut s = Search {
        inst,
        occ: inst.occurrences(),
        ones: vec![0; inst.m()],
        open: vec![inst.k() as u32; inst.m()],
        value: vec![None; n],
        trail: Vec::with_capacity(n),
        max_solutions: limits.max_solutions,
        out: Vec::new(),
    };
    s.solve(0)?;
    Ok(SolutionSet {
        n,
        instance_fingerprint: inst.fingerprint(),
        masks: s.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::satisfies;
    use crate::rng::RngSpec;
    use crate::instance::generate_instance;

    fn brute_force(inst: &EcInstance) -> Vec<String> {
        let n = inst.n();
        let mut all: Vec<Assignment> = (0..1u64 << n)
            .map(|m| Assignment::from_mask(m, n))
            .filter(|a| satisfies(a, inst).unwrap())
            .collect();
        all.sort();
        all.iter().map(|a| a.to_bit_string()).collect()
    }

    fn enumerate(inst: &EcInstance) -> SolutionSet {
        enumerate_solutions(inst, &EnumerationLimits::default()).unwrap()
    }

    #[test]
    fn single_clause() {
        let inst = EcInstance::from_one_based(3, 3, &[[1, 2, 3]]).unwrap();
        assert_eq!(enumerate(&inst).bit_strings(), ["001", "010", "100"]);
    }

    #[test]
    fn empty_formula() {
        let inst = EcInstance::new::<[usize; 3]>(2, 3, &[]).unwrap();
        assert_eq!(enumerate(&inst).bit_strings(), ["00", "01", "10", "11"]);
    }

    #[test]
    fn two_clauses() {
        let inst = EcInstance::from_one_based(4, 3, &[[1, 2, 3], [1, 2, 4]]).unwrap();
        let got = enumerate(&inst).bit_strings();
        assert_eq!(got, ["0011", "0100", "1000"]);
        assert_eq!(got, brute_force(&inst));
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        for seed in 0..300 {
            let n = 3 + (seed as usize % 10);
            let m = seed as usize % 7;
            let inst = generate_instance(n, m, 3, &RngSpec::new(seed, 9)).unwrap();
            let got = enumerate(&inst);
            assert_eq!(got.bit_strings(), brute_force(&inst), "seed {seed}");
            assert_eq!(got.instance_fingerprint(), inst.fingerprint());
        }
        for seed in 0..60 {
            let inst = generate_instance(9, 3, 4, &RngSpec::new(seed, 4)).unwrap();
            assert_eq!(enumerate(&inst).bit_strings(), brute_force(&inst));
        }
    }

    #[test]
    fn caps_are_enforced() {
        let inst = EcInstance::new::<[usize; 3]>(31, 3, &[]).unwrap();
        assert!(matches!(
            enumerate_solutions(&inst, &EnumerationLimits::default()),
            Err(EcError::ResourceLimit(_))
        ));
        let inst = EcInstance::new::<[usize; 3]>(10, 3, &[]).unwrap();
        let limits = EnumerationLimits { max_vars: 30, max_solutions: 100 };
        assert!(matches!(enumerate_solutions(&inst, &limits), Err(EcError::ResourceLimit(_))));
    }
}

use serde::{Deserialize, Serialize};

use crate::instance::{EcInstance, Var};

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarState {
    Free,
    QueuedPos,
    QueuedNeg,
    True,
    False,
}

/// Why a step failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConflictKind {
    /// A variable was pushed to the unit queue of the opposite sign.
    QueueConflict,
    /// A queued variable was assigned the opposite value.
    FalsifiedUnit,
}

/// Witness of a contradiction: the variable and, when a clause triggered
/// it, the clause's index in the original instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub variable: Var,
    pub clause: Option<u32>,
    pub kind: ConflictKind,
}

/// Transition counts of one assignment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEffects {
    /// Clauses removed because the variable was set TRUE.
    pub satisfied: u32,
    /// Clauses that lost the variable and kept length >= 2.
    pub shrunk: u32,
    /// 1-in-2 clauses turned into positive units.
    pub pos_pushes: u32,
    /// Other members of satisfied clauses pushed as negative units.
    pub neg_pushes: u32,
    /// Pushes of a variable already queued with the same sign.
    pub duplicate_pushes: u32,
    /// The variable was itself queued with the same sign and left its queue.
    pub consumed_unit: bool,
}

/// Counts `(P, N, C2, C3+)`: queued positive and negative units, 1-in-2
/// clauses, and clauses of length at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub p: usize,
    pub n: usize,
    pub c2: usize,
    pub c3: usize,
}

/// Residual formula during a run.
///
/// Each clause keeps its live (unassigned) members in the first `len`
/// slots of its row. Clauses of length `j >= 2` sit in bucket `j`;
/// length-1 residues are unit-queue entries rather than clauses.
#[derive(Clone, Debug)]
pub struct WorkingFormula {
    k: usize,
    members: Vec<Var>,
    len: Vec<u8>,
    buckets: Vec<Vec<u32>>,
    bucket_pos: Vec<u32>,
    occ_start: Vec<u32>,
    occ: Vec<u32>,
    state: Vec<VarState>,
    pos_queue: Vec<Var>,
    neg_queue: Vec<Var>,
    queue_pos: Vec<u32>,
    free: Vec<Var>,
    free_pos: Vec<u32>,
    long_clauses: usize,
}

impl WorkingFormula {
    pub fn new(inst: &EcInstance) -> Self {
        let n = inst.n();
        let k = inst.k();
        let m = inst.m();
        let mut members = Vec::with_capacity(m * k);
        for c in inst.clauses() {
            members.extend_from_slice(c);
        }
        let mut counts = vec![0u32; n + 1];
        for &v in &members {
            counts[v as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let occ_start = counts.clone();
        let mut fill = counts;
        let mut occ = vec![0u32; members.len()];
        for (ci, c) in inst.clauses().enumerate() {
            for &v in c {
                occ[fill[v as usize] as usize] = ci as u32;
                fill[v as usize] += 1;
            }
        }
        let mut buckets = vec![Vec::new(); k + 1];
        buckets[k] = (0..m as u32).collect();
        WorkingFormula {
            k,
            members,
            len: vec![k as u8; m],
            buckets,
            bucket_pos: (0..m as u32).collect(),
            occ_start,
            occ,
            state: vec![VarState::Free; n],
            pos_queue: Vec::new(),
            neg_queue: Vec::new(),
            queue_pos: vec![NONE; n],
            free: (0..n as Var).collect(),
            free_pos: (0..n as u32).collect(),
            long_clauses: if k >= 3 { m } else { 0 },
        }
    }

    pub fn n(&self) -> usize {
        self.state.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn state(&self, v: Var) -> VarState {
        self.state[v as usize]
    }

    /// Unassigned variables that are not waiting in a unit queue, in no
    /// particular order.
    pub fn free_vars(&self) -> &[Var] {
        &self.free
    }

    pub fn unassigned_count(&self) -> usize {
        self.free.len() + self.pos_queue.len() + self.neg_queue.len()
    }

    fn free_remove(&mut self, v: Var) {
        let i = self.free_pos[v as usize] as usize;
        self.free.swap_remove(i);
        if let Some(&moved) = self.free.get(i) {
            self.free_pos[moved as usize] = i as u32;
        }
        self.free_pos[v as usize] = NONE;
    }

    pub fn pos_queue(&self) -> &[Var] {
        &self.pos_queue
    }

    pub fn neg_queue(&self) -> &[Var] {
        &self.neg_queue
    }

    pub fn counts(&self) -> Counts {
        Counts {
            p: self.pos_queue.len(),
            n: self.neg_queue.len(),
            c2: self.buckets.get(2).map_or(0, Vec::len),
            c3: self.long_clauses,
        }
    }

    /// Number of live clauses of length `j`.
    pub fn clauses_of_length(&self, j: usize) -> usize {
        self.buckets.get(j).map_or(0, Vec::len)
    }

    /// Largest live clause length, 0 when no clause of length >= 2 remains.
    pub fn max_length(&self) -> usize {
        (2..=self.k).rev().find(|&j| !self.buckets[j].is_empty()).unwrap_or(0)
    }

    pub fn has_long_clause(&self) -> bool {
        self.long_clauses > 0
    }

    /// Live members of the `i`-th clause of length `j`.
    pub fn bucket_clause(&self, j: usize, i: usize) -> &[Var] {
        self.live(self.buckets[j][i] as usize)
    }

    /// All live clauses with their original indices.
    pub fn residual_clauses(&self) -> impl Iterator<Item = (u32, &[Var])> + '_ {
        (2..=self.k).flat_map(move |j| self.buckets[j].iter().map(move |&c| (c, self.live(c as usize))))
    }

    fn live(&self, c: usize) -> &[Var] {
        &self.members[c * self.k..c * self.k + self.len[c] as usize]
    }

    fn bucket_remove(&mut self, c: u32) {
        let j = self.len[c as usize] as usize;
        let i = self.bucket_pos[c as usize] as usize;
        let b = &mut self.buckets[j];
        b.swap_remove(i);
        if let Some(&moved) = b.get(i) {
            self.bucket_pos[moved as usize] = i as u32;
        }
        if j >= 3 {
            self.long_clauses -= 1;
        }
    }

    fn bucket_insert(&mut self, c: u32) {
        let j = self.len[c as usize] as usize;
        self.bucket_pos[c as usize] = self.buckets[j].len() as u32;
        self.buckets[j].push(c);
        if j >= 3 {
            self.long_clauses += 1;
        }
    }

    fn queue_remove(&mut self, v: Var, positive: bool) {
        let q = if positive { &mut self.pos_queue } else { &mut self.neg_queue };
        let i = self.queue_pos[v as usize] as usize;
        q.swap_remove(i);
        if let Some(&moved) = q.get(i) {
            self.queue_pos[moved as usize] = i as u32;
        }
        self.queue_pos[v as usize] = NONE;
    }

    /// Queues `v` as a unit of the given sign.
    fn push(&mut self, v: Var, positive: bool, clause: u32, fx: &mut StepEffects) -> Result<(), Contradiction> {
        let (same, other) = if positive {
            (VarState::QueuedPos, VarState::QueuedNeg)
        } else {
            (VarState::QueuedNeg, VarState::QueuedPos)
        };
        match self.state[v as usize] {
            VarState::Free => {
                self.free_remove(v);
                self.state[v as usize] = same;
                let q = if positive { &mut self.pos_queue } else { &mut self.neg_queue };
                self.queue_pos[v as usize] = q.len() as u32;
                q.push(v);
                if positive {
                    fx.pos_pushes += 1;
                } else {
                    fx.neg_pushes += 1;
                }
                Ok(())
            }
            s if s == same => {
                fx.duplicate_pushes += 1;
                Ok(())
            }
            s if s == other => Err(Contradiction {
                variable: v,
                clause: Some(clause),
                kind: ConflictKind::QueueConflict,
            }),
            _ => unreachable!("live clause member {v} is assigned"),
        }
    }

    /// Assigns an unassigned variable and simplifies every clause holding it.
    pub fn set_variable(&mut self, v: Var, value: bool) -> Result<StepEffects, Contradiction> {
        let mut fx = StepEffects::default();
        match (self.state[v as usize], value) {
            (VarState::Free, _) => self.free_remove(v),
            (VarState::QueuedPos, true) => {
                self.queue_remove(v, true);
                fx.consumed_unit = true;
            }
            (VarState::QueuedNeg, false) => {
                self.queue_remove(v, false);
                fx.consumed_unit = true;
            }
            (VarState::QueuedPos, false) | (VarState::QueuedNeg, true) => {
                return Err(Contradiction {
                    variable: v,
                    clause: None,
                    kind: ConflictKind::FalsifiedUnit,
                });
            }
            (s, _) => panic!("variable {v} already assigned ({s:?})"),
        }
        self.state[v as usize] = if value { VarState::True } else { VarState::False };

        let (lo, hi) = (self.occ_start[v as usize] as usize, self.occ_start[v as usize + 1] as usize);
        for oi in lo..hi {
            let c = self.occ[oi];
            let cu = c as usize;
            if self.len[cu] == 0 {
                continue;
            }
            self.bucket_remove(c);
            let base = cu * self.k;
            let len = self.len[cu] as usize;
            if value {
                self.len[cu] = 0;
                fx.satisfied += 1;
                for j in 0..len {
                    let w = self.members[base + j];
                    if w != v {
                        self.push(w, false, c, &mut fx)?;
                    }
                }
            } else {
                let j = (0..len).find(|&j| self.members[base + j] == v).expect("member present");
                self.members.swap(base + j, base + len - 1);
                let len = len - 1;
                if len == 1 {
                    self.len[cu] = 0;
                    let w = self.members[base];
                    self.push(w, true, c, &mut fx)?;
                } else {
                    self.len[cu] = len as u8;
                    self.bucket_insert(c);
                    fx.shrunk += 1;
                }
            }
        }
        Ok(fx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wf(n: usize, clauses: &[[usize; 3]]) -> WorkingFormula {
        WorkingFormula::new(&EcInstance::new(n, 3, clauses).unwrap())
    }

    #[test]
    fn true_turns_clause_into_negative_units() {
        let mut f = wf(3, &[[0, 1, 2]]);
        let fx = f.set_variable(0, true).unwrap();
        assert_eq!(fx.satisfied, 1);
        assert_eq!(fx.neg_pushes, 2);
        let mut q = f.neg_queue().to_vec();
        q.sort();
        assert_eq!(q, vec![1, 2]);
        assert_eq!(f.counts(), Counts { p: 0, n: 2, c2: 0, c3: 0 });
        assert_eq!(f.residual_clauses().count(), 0);
    }

    #[test]
    fn false_shrinks_clause() {
        let mut f = wf(3, &[[0, 1, 2]]);
        let fx = f.set_variable(0, false).unwrap();
        assert_eq!(fx.shrunk, 1);
        let res: Vec<(u32, Vec<Var>)> = f.residual_clauses().map(|(c, m)| (c, { let mut m = m.to_vec(); m.sort(); m })).collect();
        assert_eq!(res, vec![(0, vec![1, 2])]);
        assert_eq!(f.counts(), Counts { p: 0, n: 0, c2: 1, c3: 0 });
        assert!(!f.has_long_clause());
        // 1-in-2 losing a member becomes a positive unit
        let fx = f.set_variable(2, false).unwrap();
        assert_eq!(fx.pos_pushes, 1);
        assert_eq!(f.pos_queue(), &[1]);
        assert_eq!(f.state(1), VarState::QueuedPos);
        assert_eq!(f.unassigned_count(), 1);
    }

    #[test]
    fn conflicting_pushes() {
        // {x,y,z} and {y,w,u}: z FALSE leaves 1-in-2 on {x,y}; w TRUE queues
        // y FALSE; x FALSE would force y TRUE.
        let (x, y, z, w, u) = (0, 1, 2, 3, 4);
        let mut f = wf(5, &[[x, y, z], [y, w, u]]);
        f.set_variable(z as Var, false).unwrap();
        f.set_variable(w as Var, true).unwrap();
        assert_eq!(f.state(y as Var), VarState::QueuedNeg);
        let err = f.set_variable(x as Var, false).unwrap_err();
        assert_eq!(err, Contradiction { variable: y as Var, clause: Some(0), kind: ConflictKind::QueueConflict });
    }

    #[test]
    fn duplicates_and_falsified_units() {
        let mut f = wf(5, &[[0, 1, 2], [0, 1, 3]]);
        let fx = f.set_variable(0, true).unwrap();
        assert_eq!((fx.neg_pushes, fx.duplicate_pushes), (3, 1));
        assert_eq!(f.counts().n, 3);
        let fx = f.set_variable(1, false).unwrap();
        assert!(fx.consumed_unit);
        assert_eq!(f.counts().n, 2);
        let err = f.set_variable(2, true).unwrap_err();
        assert_eq!(err.kind, ConflictKind::FalsifiedUnit);
    }

    #[test]
    fn bookkeeping_matches_containers() {
        use crate::instance::generate_instance;
        use crate::rng::RngSpec;
        use rand::Rng;
        let inst = generate_instance(200, 60, 3, &RngSpec::new(3, 0)).unwrap();
        let mut f = WorkingFormula::new(&inst);
        let mut rng = RngSpec::new(3, 1).rng();
        for _ in 0..120 {
            let pool: Vec<Var> = (0..200).filter(|&w| !matches!(f.state(w), VarState::True | VarState::False)).collect();
            let v = pool[rng.gen_range(0..pool.len())];
            if f.set_variable(v, rng.gen_bool(0.3)).is_err() {
                break;
            }
            let c = f.counts();
            let live: Vec<_> = f.residual_clauses().collect();
            assert_eq!(c.c2, live.iter().filter(|(_, m)| m.len() == 2).count());
            assert_eq!(c.c3, live.iter().filter(|(_, m)| m.len() >= 3).count());
            for (_, m) in &live {
                assert!(m.iter().all(|&w| matches!(f.state(w), VarState::Free | VarState::QueuedPos | VarState::QueuedNeg)));
            }
            assert_eq!(c.p, (0..200).filter(|&w| f.state(w) == VarState::QueuedPos).count());
            assert_eq!(c.n, (0..200).filter(|&w| f.state(w) == VarState::QueuedNeg).count());
            let unassigned = (0..200).filter(|&w| !matches!(f.state(w), VarState::True | VarState::False)).count();
            assert_eq!(f.unassigned_count(), unassigned);
            let free = (0..200).filter(|&w| f.state(w) == VarState::Free).count();
            assert_eq!(f.free_vars().len(), free);
        }
    }
}

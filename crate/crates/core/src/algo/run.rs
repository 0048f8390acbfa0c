use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::endgame::{endgame_2xor, EndgameFailure};
use super::formula::{Contradiction, VarState, WorkingFormula};
use super::{Action, EndgameMode, FailReason, Outcome, RunOptions, RunResult, RunStats, StepLogEntry};
use crate::assignment::Assignment;
use crate::instance::{EcInstance, Var};
use crate::rng::RngSpec;
use crate::trajectory::{CurveMode, Lambdas, Schedule, TrajectoryCurve, TrajectorySample};

struct Runner<'a> {
    wf: WorkingFormula,
    rng: ChaCha8Rng,
    opts: &'a RunOptions,
    stats: RunStats,
    log: Option<Vec<StepLogEntry>>,
    samples: Option<Vec<TrajectorySample>>,
    stride: usize,
}

impl<'a> Runner<'a> {
    fn new(inst: &EcInstance, rng: &RngSpec, opts: &'a RunOptions) -> Self {
        let n = inst.n();
        let mut r = Runner {
            wf: WorkingFormula::new(inst),
            rng: rng.rng(),
            opts,
            stats: RunStats { n, ..RunStats::default() },
            log: opts.record_log.then(Vec::new),
            samples: opts.record_trajectory.then(Vec::new),
            stride: n.div_ceil(1000).max(1),
        };
        r.record();
        r
    }

    fn record(&mut self) {
        let n = self.stats.n as f64;
        let c = self.wf.counts();
        let t = self.stats.steps as f64 / n;
        if let Some(s) = self.samples.as_mut() {
            if s.last().is_some_and(|x| x.t == t) {
                return;
            }
            s.push(TrajectorySample {
                t,
                c3: c.c3 as f64 / n,
                c2: c.c2 as f64 / n,
                p: c.p as f64 / n,
                n: c.n as f64 / n,
            });
        }
    }

    fn apply(&mut self, branch: u8, action: Action, v: Var, value: bool) -> Result<(), Contradiction> {
        if let Some(log) = self.log.as_mut() {
            log.push(StepLogEntry {
                step: self.stats.steps,
                branch,
                action,
                variable: v,
                value,
                before: self.wf.counts(),
            });
        }
        let fx = self.wf.set_variable(v, value)?;
        self.stats.pos_inflow += fx.pos_pushes as u64;
        self.stats.neg_inflow += fx.neg_pushes as u64;
        self.stats.duplicate_pushes += fx.duplicate_pushes as u64;
        self.stats.steps += 1;
        if self.stats.steps.is_multiple_of(self.stride) {
            self.record();
        }
        Ok(())
    }

    /// A uniform variable that is neither assigned nor queued; when every
    /// unassigned variable is queued, a uniform queued one.
    fn random_free(&mut self) -> Var {
        let free = self.wf.free_vars();
        if !free.is_empty() {
            return free[self.rng.gen_range(0..free.len())];
        }
        let (p, n) = (self.wf.pos_queue(), self.wf.neg_queue());
        let i = self.rng.gen_range(0..p.len() + n.len());
        if i < p.len() {
            p[i]
        } else {
            n[i - p.len()]
        }
    }

    fn random_unit(&mut self, positive: bool) -> Var {
        let q = if positive { self.wf.pos_queue() } else { self.wf.neg_queue() };
        q[self.rng.gen_range(0..q.len())]
    }

    /// A uniform member of a uniform clause of maximal length.
    fn largest_clause_member(&mut self) -> Var {
        let j = self.wf.max_length();
        debug_assert!(j >= 3);
        let i = self.rng.gen_range(0..self.wf.clauses_of_length(j));
        let pick = self.rng.gen_range(0..j);
        self.wf.bucket_clause(j, i)[pick]
    }

    fn draw(&mut self, l: &Lambdas) -> u8 {
        let w = l.as_array();
        let sum: f64 = w.iter().sum();
        let w = if sum > 0.0 { w } else { [1.0; 3] };
        let u = self.rng.gen::<f64>() * w.iter().sum::<f64>();
        if u < w[0] {
            1
        } else if u < w[0] + w[1] {
            2
        } else {
            3
        }
    }

    fn mark_t2(&mut self) {
        if self.stats.t2_emp.is_none() {
            self.stats.t2_emp = Some(self.stats.steps as f64 / self.stats.n as f64);
            self.record();
        }
    }

    fn drain(&mut self) -> Result<(), Contradiction> {
        loop {
            let c = self.wf.counts();
            let (v, value) = if c.p > 0 {
                (*self.wf.pos_queue().last().unwrap(), true)
            } else if c.n > 0 {
                (*self.wf.neg_queue().last().unwrap(), false)
            } else {
                return Ok(());
            };
            self.apply(0, Action::Drain, v, value)?;
            self.stats.drain_steps += 1;
        }
    }

    fn finish(mut self, result: Result<(), Contradiction>, mode: CurveMode, r: f64, schedule_id: String) -> RunResult {
        let outcome = match result {
            Err(witness) => Outcome::Fail {
                reason: FailReason::Contradiction { witness },
                step: self.stats.steps,
            },
            Ok(()) => {
                self.record();
                let limit = self.opts.f_n.eval(self.stats.n);
                let (graph, col) = endgame_2xor(&self.wf, limit);
                self.stats.graph = Some(graph);
                match col {
                    Ok(col) => {
                        let n = self.stats.n;
                        let mut a = Assignment::all(n, false);
                        for v in 0..n as Var {
                            if self.wf.state(v) == VarState::True {
                                a.set(v, true);
                            }
                        }
                        let mut b = a.clone();
                        for &(v, x) in &col.a_values {
                            a.set(v, x);
                            b.set(v, !x);
                        }
                        Outcome::Pair { a, b, components: col.components }
                    }
                    Err(e) => Outcome::Fail {
                        reason: match e {
                            EndgameFailure::NonBipartite => FailReason::NonBipartite,
                            EndgameFailure::OversizedComponent { size, limit } => {
                                FailReason::OversizedComponent { size, limit }
                            }
                        },
                        step: self.stats.steps,
                    },
                }
            }
        };
        RunResult {
            outcome,
            trajectory: self.samples.map(|samples| TrajectoryCurve { samples, mode, r, schedule_id }),
            stats: self.stats,
            log: self.log,
        }
    }
}

fn density(inst: &EcInstance) -> f64 {
    inst.m() as f64 / inst.n() as f64
}

/// LAZY LARGEST-CLAUSE. While a clause of length >= 3 exists, each step
/// draws branch 1, 2 or 3 with the schedule's probabilities at `t =
/// steps / n`:
///
/// 1. set a random positive unit TRUE, else a random free variable TRUE;
/// 2. set a random negative unit FALSE, else a random free variable FALSE;
/// 3. set a random member of a random maximal clause FALSE.
///
/// Then the unit queues are emptied (see [`EndgameMode`]) and the
/// remaining 1-in-2 clauses go to the bipartite endgame.
pub fn run_lazy(inst: &EcInstance, schedule: &dyn Schedule, rng: &RngSpec, opts: &RunOptions) -> RunResult {
    let mut run = Runner::new(inst, rng, opts);
    let result = (|| {
        while run.wf.has_long_clause() {
            let l = schedule.lambdas(run.stats.steps as f64 / run.stats.n as f64);
            run.stats.schedule_clamped |= l.clamped;
            let branch = run.draw(&l);
            run.stats.branch_counts[branch as usize - 1] += 1;
            let (action, v, value) = match branch {
                1 | 2 => {
                    let positive = branch == 1;
                    let queued = if positive { run.wf.counts().p } else { run.wf.counts().n };
                    if queued > 0 {
                        let action = if positive { Action::PositiveUnit } else { Action::NegativeUnit };
                        (action, run.random_unit(positive), positive)
                    } else {
                        run.stats.random_fallbacks[branch as usize - 1] += 1;
                        let action = if positive { Action::RandomTrue } else { Action::RandomFalse };
                        (action, run.random_free(), positive)
                    }
                }
                _ => (Action::LargestClause, run.largest_clause_member(), false),
            };
            run.apply(branch, action, v, value)?;
        }
        run.mark_t2();
        match opts.endgame {
            EndgameMode::Drain => run.drain(),
            EndgameMode::KeepLazy => {
                loop {
                    let c = run.wf.counts();
                    if c.p == 0 && c.n == 0 {
                        return Ok(());
                    }
                    let l = schedule.lambdas(run.stats.steps as f64 / run.stats.n as f64);
                    run.stats.schedule_clamped |= l.clamped;
                    let applicable = [c.p > 0, c.n > 0, false];
                    let usable = l.as_array().iter().zip(applicable).any(|(&w, a)| a && w > 0.0);
                    let l = if usable {
                        l
                    } else {
                        Lambdas { l1: 1.0, l2: 1.0, l3: 0.0, clamped: l.clamped }
                    };
                    let mut branch = run.draw(&l);
                    while !applicable[branch as usize - 1] {
                        run.stats.redraws += 1;
                        branch = run.draw(&l);
                    }
                    run.stats.branch_counts[branch as usize - 1] += 1;
                    let positive = branch == 1;
                    let v = run.random_unit(positive);
                    let action = if positive { Action::PositiveUnit } else { Action::NegativeUnit };
                    run.apply(branch, action, v, positive)?;
                    run.stats.drain_steps += 1;
                }
            }
        }
    })();
    let id = schedule.id();
    run.finish(result, CurveMode::Empirical, density(inst), id)
}

/// LARGEST-CLAUSE: serve a uniformly random unit clause whenever one
/// exists, otherwise set a random member of a random maximal clause FALSE;
/// the endgame follows once both are exhausted.
pub fn run_largest_clause(inst: &EcInstance, rng: &RngSpec, opts: &RunOptions) -> RunResult {
    let mut run = Runner::new(inst, rng, opts);
    let result = (|| loop {
        if !run.wf.has_long_clause() {
            run.mark_t2();
        }
        let c = run.wf.counts();
        if c.p + c.n > 0 {
            let i = run.rng.gen_range(0..c.p + c.n);
            let (action, v, value) = if i < c.p {
                (Action::PositiveUnit, run.wf.pos_queue()[i], true)
            } else {
                (Action::NegativeUnit, run.wf.neg_queue()[i - c.p], false)
            };
            if run.stats.t2_emp.is_some() {
                run.stats.drain_steps += 1;
            }
            run.apply(0, action, v, value)?;
        } else if run.wf.has_long_clause() {
            let v = run.largest_clause_member();
            run.stats.branch_counts[2] += 1;
            run.apply(3, Action::LargestClause, v, false)?;
        } else {
            return Ok(());
        }
    })();
    run.finish(result, CurveMode::Empirical, density(inst), "largest-clause".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::{hamming, satisfies};
    use crate::instance::generate_instance;
    use crate::oracle::{enumerate_solutions, EnumerationLimits};
    use crate::trajectory::DefaultSchedule;

    fn opts() -> RunOptions {
        RunOptions { record_trajectory: true, record_log: true, ..RunOptions::default() }
    }

    fn check_pair(inst: &EcInstance, res: &RunResult) {
        if let Outcome::Pair { a, b, components } = &res.outcome {
            assert!(satisfies(a, inst).unwrap());
            assert!(satisfies(b, inst).unwrap());
            let mut diff: Vec<Var> = (0..inst.n() as Var).filter(|&v| a.get(v) != b.get(v)).collect();
            let mut verts: Vec<Var> = components.iter().flatten().copied().collect();
            diff.sort();
            verts.sort();
            assert_eq!(diff, verts);
            assert_eq!(hamming(a, b).unwrap(), verts.len());
        }
    }

    #[test]
    fn empty_formula_gives_opposite_pair() {
        let inst = EcInstance::new::<[usize; 3]>(5, 3, &[]).unwrap();
        for res in [
            run_lazy(&inst, &DefaultSchedule, &RngSpec::new(1, 0), &opts()),
            run_largest_clause(&inst, &RngSpec::new(1, 0), &opts()),
        ] {
            match &res.outcome {
                Outcome::Pair { a, b, components } => {
                    assert_eq!(a, &b.complement());
                    assert_eq!(components.len(), 5);
                    assert!(components.iter().all(|c| c.len() == 1));
                }
                other => panic!("{other:?}"),
            }
            assert_eq!(res.stats.steps, 0);
            assert_eq!(res.stats.t2_emp, Some(0.0));
            assert_eq!(res.raw_overlap(), Some(0.0));
        }
    }

    #[test]
    fn single_clause_pairs_are_solutions() {
        let inst = EcInstance::from_one_based(3, 3, &[[1, 2, 3]]).unwrap();
        let sols = enumerate_solutions(&inst, &EnumerationLimits::default()).unwrap().solutions();
        let mut successes = 0;
        for seed in 0..50 {
            for res in [
                run_lazy(&inst, &DefaultSchedule, &RngSpec::new(seed, 0), &opts()),
                run_largest_clause(&inst, &RngSpec::new(seed, 0), &opts()),
            ] {
                check_pair(&inst, &res);
                if let Outcome::Pair { a, b, .. } = &res.outcome {
                    assert!(sols.contains(a) && sols.contains(b));
                    successes += 1;
                }
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn runs_are_deterministic() {
        let inst = generate_instance(2000, 200, 3, &RngSpec::new(8, 0)).unwrap();
        let a = run_lazy(&inst, &DefaultSchedule, &RngSpec::new(8, 1), &opts());
        let b = run_lazy(&inst, &DefaultSchedule, &RngSpec::new(8, 1), &opts());
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_largest_clause(&inst, &RngSpec::new(8, 1), &opts());
        assert_eq!(c, run_largest_clause(&inst, &RngSpec::new(8, 1), &opts()));
    }

    #[test]
    fn random_runs_return_valid_pairs() {
        let mut pairs = 0;
        for seed in 0..40 {
            let inst = generate_instance(3000, 300, 3, &RngSpec::new(seed, 0)).unwrap();
            for mode in [EndgameMode::Drain, EndgameMode::KeepLazy] {
                let o = RunOptions { endgame: mode, ..opts() };
                let res = run_lazy(&inst, &DefaultSchedule, &RngSpec::new(seed, 1), &o);
                check_pair(&inst, &res);
                pairs += res.outcome.is_pair() as usize;
                let t = res.trajectory.as_ref().unwrap();
                assert!(t.samples.windows(2).all(|w| w[0].t < w[1].t));
            }
            let res = run_largest_clause(&inst, &RngSpec::new(seed, 1), &opts());
            check_pair(&inst, &res);
        }
        assert!(pairs > 20, "{pairs}");
    }

    #[test]
    fn largest_clause_serves_units_first() {
        let inst = generate_instance(3000, 400, 3, &RngSpec::new(4, 0)).unwrap();
        let res = run_largest_clause(&inst, &RngSpec::new(4, 1), &opts());
        for e in res.log.as_ref().unwrap() {
            let units = e.before.p + e.before.n > 0;
            assert_eq!(units, matches!(e.action, Action::PositiveUnit | Action::NegativeUnit));
        }
    }

    #[test]
    fn forced_contradiction_fails() {
        // All four triples over four variables: no solution, and every run
        // ends with some variable forced both ways.
        let inst = EcInstance::from_one_based(4, 3, &[[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]).unwrap();
        assert!(enumerate_solutions(&inst, &EnumerationLimits::default()).unwrap().is_empty());
        for seed in 0..30 {
            for res in [
                run_largest_clause(&inst, &RngSpec::new(seed, 0), &opts()),
                run_lazy(&inst, &DefaultSchedule, &RngSpec::new(seed, 0), &opts()),
            ] {
                assert!(
                    matches!(res.outcome, Outcome::Fail { reason: FailReason::Contradiction { .. }, .. }),
                    "{:?}",
                    res.outcome
                );
            }
        }
    }
}

//! LARGEST-CLAUSE and LAZY LARGEST-CLAUSE with the bipartite endgame,
//! pair construction and overlap tuning.

mod endgame;
mod formula;
mod run;
mod tune;

pub use endgame::{endgame_2xor, EndgameColouring, EndgameFailure, EndgameGraphStats};
pub use formula::{ConflictKind, Contradiction, Counts, StepEffects, VarState, WorkingFormula};
pub use run::{run_largest_clause, run_lazy};
pub use tune::{tune_overlap, TuneMethod, TunedPair};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::error::EcError;
use crate::instance::Var;
use crate::trajectory::TrajectoryCurve;

/// Component-size limit `f(n)` for the endgame graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum FOfN {
    /// `(ln n)^2`.
    #[default]
    LnSquared,
    /// `c ln n`.
    LnTimes(f64),
    /// A fixed bound.
    Constant(f64),
}

impl FOfN {
    pub fn eval(&self, n: usize) -> f64 {
        let ln = (n.max(1) as f64).ln();
        match *self {
            FOfN::LnSquared => ln * ln,
            FOfN::LnTimes(c) => c * ln,
            FOfN::Constant(c) => c,
        }
    }
}

/// Parses `ln2`, `<c>ln` or a plain number.
impl FromStr for FOfN {
    type Err = EcError;

    fn from_str(s: &str) -> Result<Self, EcError> {
        let s = s.trim();
        let bad = || EcError::invalid(format!("unrecognised f(n) `{s}`; use ln2, <c>ln or a number"));
        if s == "ln2" {
            return Ok(FOfN::LnSquared);
        }
        let f = if let Some(c) = s.strip_suffix("ln") {
            FOfN::LnTimes(c.parse().map_err(|_| bad())?)
        } else {
            FOfN::Constant(s.parse().map_err(|_| bad())?)
        };
        match f {
            FOfN::LnTimes(c) | FOfN::Constant(c) if !(c > 0.0) => Err(bad()),
            f => Ok(f),
        }
    }
}

impl fmt::Display for FOfN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FOfN::LnSquared => f.write_str("ln2"),
            FOfN::LnTimes(c) => write!(f, "{c}ln"),
            FOfN::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// What happens once no clause of length >= 3 is left.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndgameMode {
    /// Serve the unit queues deterministically (positive first, newest
    /// first) before the endgame.
    #[default]
    Drain,
    /// Keep drawing branches with the schedule probabilities, redrawing
    /// branches that do not apply, until both queues are empty.
    KeepLazy,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub f_n: FOfN,
    pub record_trajectory: bool,
    pub record_log: bool,
    pub endgame: EndgameMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            f_n: FOfN::LnSquared,
            record_trajectory: false,
            record_log: false,
            endgame: EndgameMode::Drain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum FailReason {
    Contradiction { witness: Contradiction },
    NonBipartite,
    OversizedComponent { size: usize, limit: f64 },
    WindowUnreachable { agreements: usize, lo: usize, hi: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// Two satisfying assignments agreeing off the endgame graph and
    /// opposite on it; `components` partitions the graph's vertices.
    Pair {
        a: Assignment,
        b: Assignment,
        components: Vec<Vec<Var>>,
    },
    Fail { reason: FailReason, step: usize },
}

impl Outcome {
    pub fn is_pair(&self) -> bool {
        matches!(self, Outcome::Pair { .. })
    }
}

/// How a step chose its variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Action {
    PositiveUnit,
    NegativeUnit,
    RandomTrue,
    RandomFalse,
    LargestClause,
    Drain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLogEntry {
    pub step: usize,
    /// Branch drawn from the schedule (1, 2 or 3); 0 for unit-priority and
    /// drain steps.
    pub branch: u8,
    pub action: Action,
    pub variable: Var,
    pub value: bool,
    /// Counts before the step.
    pub before: Counts,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub n: usize,
    /// Scaled step at which no clause of length >= 3 remained.
    pub t2_emp: Option<f64>,
    pub steps: usize,
    /// Steps taken after `t2_emp` to empty the unit queues.
    pub drain_steps: usize,
    pub graph: Option<EndgameGraphStats>,
    /// New entries pushed to the positive / negative queue.
    pub pos_inflow: u64,
    pub neg_inflow: u64,
    pub duplicate_pushes: u64,
    /// Steps per drawn branch.
    pub branch_counts: [u64; 3],
    /// Branch 1 / 2 draws that found their queue empty.
    pub random_fallbacks: [u64; 2],
    /// Draws of an inapplicable branch that were redrawn.
    pub redraws: u64,
    pub schedule_clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub outcome: Outcome,
    pub trajectory: Option<TrajectoryCurve>,
    pub stats: RunStats,
    pub log: Option<Vec<StepLogEntry>>,
}

impl RunResult {
    /// Agreement count of the raw pair.
    pub fn raw_agreements(&self) -> Option<usize> {
        match &self.outcome {
            Outcome::Pair { components, .. } => {
                Some(self.stats.n - components.iter().map(Vec::len).sum::<usize>())
            }
            Outcome::Fail { .. } => None,
        }
    }

    pub fn raw_overlap(&self) -> Option<f64> {
        self.raw_agreements().map(|a| a as f64 / self.stats.n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_of_n_parsing() {
        assert_eq!("ln2".parse::<FOfN>().unwrap(), FOfN::LnSquared);
        assert_eq!("3ln".parse::<FOfN>().unwrap(), FOfN::LnTimes(3.0));
        assert_eq!("40".parse::<FOfN>().unwrap(), FOfN::Constant(40.0));
        assert!("x".parse::<FOfN>().is_err());
        assert!("-1".parse::<FOfN>().is_err());
        let n = 100_000;
        assert!((FOfN::LnSquared.eval(n) - (n as f64).ln().powi(2)).abs() < 1e-12);
        for f in [FOfN::LnSquared, FOfN::LnTimes(2.5), FOfN::Constant(7.0)] {
            assert_eq!(f.to_string().parse::<FOfN>().unwrap(), f);
        }
    }
}

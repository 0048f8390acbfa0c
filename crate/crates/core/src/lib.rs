//! Bounds, simulations and exhaustive oracles for the q-overlap random
//! k-Exact-Cover (positive 1-in-k SAT) problem.
//!
//! * [`instance`], [`assignment`]: random formulas, assignments, overlaps
//!   and pair profiles.
//! * [`oracle`]: exhaustive ground truth for small instances.
//! * [`upper`]: first-moment quantities and the upper bound `r_up(q, k)`.
//! * [`trajectory`]: closed forms and ODE integration for the lazy
//!   largest-clause algorithm, and the lower bound `r_lb(q)`.
//! * [`algo`]: executable LARGEST-CLAUSE / LAZY LARGEST-CLAUSE runs, the
//!   bipartite endgame and overlap tuning.
//! * [`campaign`]: seeded batches of runs with summary statistics.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algo;
pub mod assignment;
pub mod campaign;
pub mod combinatorics;
pub mod dsu;
pub mod error;
pub mod instance;
pub mod oracle;
pub mod rng;
pub mod trajectory;
pub mod upper;

pub use assignment::{
    clause_pair_profile, global_pair_profile, overlap_and_distance, satisfies, Assignment,
    ClausePairProfile, GlobalPairProfile, OverlapWindow,
};
pub use error::{EcError, Result};
pub use instance::{generate_instance, EcInstance, Var};
pub use rng::RngSpec;

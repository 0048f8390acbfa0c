//! Seeded batches of lazy runs and their summary statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{run_lazy, EndgameGraphStats, FailReason, Outcome, RunOptions, RunResult};
use crate::assignment::satisfies;
use crate::error::{EcError, Result};
use crate::instance::generate_instance;
use crate::rng::RngSpec;
use crate::trajectory::{
    closed_forms, endgame_density_mu, make_schedule, ode_integrate, stopping_time_t2, Field, OdeMode,
    ScheduleKind, TrajectoryCurve, DEFAULT_STEP,
};

/// `m = round(r n)`, ties to even.
pub fn clause_count(r: f64, n: usize) -> usize {
    (r * n as f64).round_ties_even() as usize
}

pub const ROUNDING_RULE: &str = "m = round(r*n), ties to even";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub n: usize,
    pub r: f64,
    pub k: usize,
    pub runs: usize,
    pub seed: u64,
    pub schedule: ScheduleKind,
    pub options: RunOptions,
}

impl CampaignConfig {
    pub fn m(&self) -> usize {
        clause_count(self.r, self.n)
    }

    /// Run `i` draws its instance from stream `2i` and its choices from
    /// stream `2i + 1` of the master seed.
    pub fn seeds(&self, i: usize) -> (RngSpec, RngSpec) {
        (
            RngSpec::new(self.seed, 2 * i as u64),
            RngSpec::new(self.seed, 2 * i as u64 + 1),
        )
    }
}

/// Sup-norm distances of one empirical trajectory, taken over its samples
/// up to `t2_emp` (or its last sample for failed runs).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveDistances {
    pub c3_closed_form: f64,
    pub c2_closed_form: f64,
    pub c2_paper_ode: f64,
    pub c2_recurrence_ode: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub index: usize,
    pub instance_rng: RngSpec,
    pub algorithm_rng: RngSpec,
    pub success: bool,
    pub failure: Option<FailReason>,
    pub t2_emp: Option<f64>,
    pub raw_overlap: Option<f64>,
    /// Both assignments were checked against the instance.
    pub pair_verified: Option<bool>,
    pub graph: Option<EndgameGraphStats>,
    pub distances: Option<CurveDistances>,
    pub pos_inflow: u64,
    pub neg_inflow: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Distribution {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let count = v.len();
        let mean = v.iter().sum::<f64>() / count as f64;
        let var = if count > 1 {
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        let median = if count % 2 == 1 {
            v[count / 2]
        } else {
            (v[count / 2 - 1] + v[count / 2]) / 2.0
        };
        Some(Distribution {
            count,
            mean,
            std_dev: var.sqrt(),
            median,
            min: v[0],
            max: v[count - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub m: usize,
    pub successes: usize,
    pub success_fraction: Option<f64>,
    pub t2_predicted: f64,
    pub t2_emp: Option<Distribution>,
    pub raw_overlap: Option<Distribution>,
    pub mean_degree: Option<Distribution>,
    pub max_component: Option<usize>,
    pub mu_closed_form: Option<f64>,
    pub mu_recurrence: Option<f64>,
    pub c3_closed_form: Option<Distribution>,
    pub c2_closed_form: Option<Distribution>,
    pub c2_paper_ode: Option<Distribution>,
    pub c2_recurrence_ode: Option<Distribution>,
    pub records: Vec<RunRecord>,
}

pub struct CampaignOutput {
    pub summary: CampaignSummary,
    pub results: Vec<RunResult>,
}

fn distances(traj: &TrajectoryCurve, t_max: f64, r: f64, paper: &TrajectoryCurve, rec: &TrajectoryCurve) -> CurveDistances {
    CurveDistances {
        c3_closed_form: traj.sup_distance_to(Field::C3, t_max, |t| closed_forms(t, r).0),
        c2_closed_form: traj.sup_distance_to(Field::C2, t_max, |t| closed_forms(t, r).1),
        c2_paper_ode: traj.sup_distance(paper, Field::C2, t_max),
        c2_recurrence_ode: traj.sup_distance(rec, Field::C2, t_max),
    }
}

/// Runs `config.runs` independent lazy runs in parallel. Failed runs are
/// recorded, never fatal.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutput> {
    if config.n == 0 || !(config.r >= 0.0) {
        return Err(EcError::invalid("campaign needs n > 0 and r >= 0"));
    }
    let m = config.m();
    let schedule = make_schedule(config.schedule, config.r)?;
    let curves = if config.r > 0.0 {
        Some((
            ode_integrate(config.r, schedule.as_ref(), OdeMode::PaperOde, DEFAULT_STEP)?,
            ode_integrate(config.r, schedule.as_ref(), OdeMode::RecurrenceOde, DEFAULT_STEP)?,
        ))
    } else {
        None
    };
    let mut options = config.options;
    options.record_trajectory = true;
    let per_run: Vec<(RunRecord, RunResult)> = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let (inst_rng, algo_rng) = config.seeds(i);
            let inst = generate_instance(config.n, m, config.k, &inst_rng)?;
            let res = run_lazy(&inst, schedule.as_ref(), &algo_rng, &options);
            let (success, failure, pair_verified) = match &res.outcome {
                Outcome::Pair { a, b, .. } => (true, None, Some(satisfies(a, &inst)? && satisfies(b, &inst)?)),
                Outcome::Fail { reason, .. } => (false, Some(reason.clone()), None),
            };
            let dist = match (&res.trajectory, &curves) {
                (Some(traj), Some((paper, rec))) => {
                    let t_max = res.stats.t2_emp.or(traj.t_end()).unwrap_or(0.0);
                    Some(distances(traj, t_max, config.r, paper, rec))
                }
                _ => None,
            };
            let record = RunRecord {
                index: i,
                instance_rng: inst_rng,
                algorithm_rng: algo_rng,
                success,
                failure,
                t2_emp: res.stats.t2_emp,
                raw_overlap: res.raw_overlap(),
                pair_verified,
                graph: res.stats.graph,
                distances: dist,
                pos_inflow: res.stats.pos_inflow,
                neg_inflow: res.stats.neg_inflow,
            };
            Ok((record, res))
        })
        .collect::<Result<_>>()?;
    let (records, results): (Vec<RunRecord>, Vec<RunResult>) = per_run.into_iter().unzip();

    let collect = |f: &dyn Fn(&RunRecord) -> Option<f64>| -> Option<Distribution> {
        Distribution::of(&records.iter().filter_map(f).collect::<Vec<_>>())
    };
    let successes = records.iter().filter(|r| r.success).count();
    let ok = |r: &RunRecord| r.success;
    let density = (config.r > 0.0).then(|| endgame_density_mu(config.r)).transpose()?;
    let summary = CampaignSummary {
        config: config.clone(),
        m,
        successes,
        success_fraction: (config.runs > 0).then(|| successes as f64 / config.runs as f64),
        t2_predicted: stopping_time_t2(config.r),
        t2_emp: collect(&|r| r.t2_emp),
        raw_overlap: collect(&|r| r.raw_overlap),
        mean_degree: collect(&|r| if ok(r) { r.graph.map(|g| g.mean_degree()) } else { None }),
        max_component: records.iter().filter(|r| ok(r)).filter_map(|r| r.graph.map(|g| g.max_component)).max(),
        mu_closed_form: density.map(|d| d.mu),
        mu_recurrence: density.map(|d| d.mu_recurrence),
        c3_closed_form: collect(&|r| r.distances.map(|d| d.c3_closed_form)),
        c2_closed_form: collect(&|r| r.distances.map(|d| d.c2_closed_form)),
        c2_paper_ode: collect(&|r| r.distances.map(|d| d.c2_paper_ode)),
        c2_recurrence_ode: collect(&|r| r.distances.map(|d| d.c2_recurrence_ode)),
        records,
    };
    Ok(CampaignOutput { summary, results })
}

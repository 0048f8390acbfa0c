use std::fmt::Write;
use std::path::Path;

use overlap_ec::algo::{tune_overlap, FailReason, RunOptions, RunResult};
use overlap_ec::campaign::{run_campaign, CampaignConfig, CampaignSummary, RunRecord, ROUNDING_RULE};
use overlap_ec::trajectory::{
    closed_form_curve, make_schedule, ode_integrate, stopping_time_t2, OdeMode, ScheduleKind, CSV_HEADER,
    DEFAULT_STEP,
};
use overlap_ec::{generate_instance, OverlapWindow};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Format, GlobalArgs, ScheduleArg, SimulateArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{instance_digest, DerivedSeed, Outputs};

pub const RUNS_CSV_HEADER: &str = "index,success,failure,t2_emp,raw_overlap,pair_verified,vertices,edges,\
max_component,mean_degree,c3_closed_form,c2_closed_form,c2_paper_ode,c2_recurrence_ode,pos_inflow,neg_inflow";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuneSummary {
    pub q: f64,
    pub epsilon_n: f64,
    pub attempts: usize,
    pub landed: usize,
    /// Mean tuned overlap over the runs that landed.
    pub mean_overlap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateReport {
    pub rounding_rule: String,
    pub summary: CampaignSummary,
    pub tuning: Vec<TuneSummary>,
}

pub fn failure_name(reason: &FailReason) -> &'static str {
    match reason {
        FailReason::Contradiction { .. } => "contradiction",
        FailReason::NonBipartite => "non-bipartite",
        FailReason::OversizedComponent { .. } => "oversized-component",
        FailReason::WindowUnreachable { .. } => "window-unreachable",
    }
}

pub fn schedule_kind(arg: ScheduleArg, epsilon: f64) -> ScheduleKind {
    match arg {
        ScheduleArg::Default => ScheduleKind::Default,
        ScheduleArg::Adaptive => ScheduleKind::AdaptiveSketch { epsilon },
    }
}

pub fn tune_all(n: usize, results: &[RunResult], targets: &[f64], exponent: f64) -> CliResult<Vec<TuneSummary>> {
    let mut out = Vec::with_capacity(targets.len());
    for &q in targets {
        let window = OverlapWindow::with_exponent(q, n, exponent)?;
        let (mut attempts, mut landed, mut total) = (0, 0, 0.0);
        for res in results.iter().filter(|r| r.outcome.is_pair()) {
            attempts += 1;
            if let Ok(pair) = tune_overlap(&res.outcome, &window) {
                landed += 1;
                total += pair.overlap;
            }
        }
        out.push(TuneSummary {
            q,
            epsilon_n: window.epsilon_n,
            attempts,
            landed,
            mean_overlap: (landed > 0).then(|| total / landed as f64),
        });
    }
    Ok(out)
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut s = String::from(RUNS_CSV_HEADER);
    s.push('\n');
    for r in records {
        let d = r.distances;
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            r.success,
            r.failure.as_ref().map(failure_name).unwrap_or(""),
            cell(r.t2_emp),
            cell(r.raw_overlap),
            cell(r.pair_verified),
            cell(r.graph.map(|g| g.vertices)),
            cell(r.graph.map(|g| g.edges)),
            cell(r.graph.map(|g| g.max_component)),
            cell(r.graph.map(|g| g.mean_degree())),
            cell(d.map(|d| d.c3_closed_form)),
            cell(d.map(|d| d.c2_closed_form)),
            cell(d.map(|d| d.c2_paper_ode)),
            cell(d.map(|d| d.c2_recurrence_ode)),
            r.pos_inflow,
            r.neg_inflow
        )
        .unwrap();
    }
    s
}

fn reference_csv(r: f64, schedule: ScheduleKind) -> CliResult<String> {
    let sched = make_schedule(schedule, r)?;
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let closed = closed_form_curve(r, DEFAULT_STEP, stopping_time_t2(r));
    s.push_str(&closed.to_csv(false));
    for mode in [OdeMode::PaperOde, OdeMode::RecurrenceOde] {
        s.push_str(&ode_integrate(r, sched.as_ref(), mode, DEFAULT_STEP)?.to_csv(false));
    }
    Ok(s)
}

pub fn run(global: &GlobalArgs, args: &SimulateArgs) -> CliResult<()> {
    if args.k < 3 || args.n < args.k {
        return Err(CliError::Invalid(format!("need 3 <= k <= n, got k={}, n={}", args.k, args.n)));
    }
    if !(args.r >= 0.0) || !args.r.is_finite() {
        return Err(CliError::Invalid(format!("clause density r={} must be finite and >= 0", args.r)));
    }
    if args.tune.iter().any(|q| !(0.0..=1.0).contains(q)) {
        return Err(CliError::Invalid("tuning targets must lie in [0, 1]".into()));
    }
    let schedule = schedule_kind(args.schedule, args.adaptive_epsilon);
    let config = CampaignConfig {
        n: args.n,
        r: args.r,
        k: args.k,
        runs: args.runs,
        seed: global.seed,
        schedule,
        options: RunOptions {
            f_n: global.f_of_n,
            record_trajectory: true,
            record_log: args.log,
            endgame: args.endgame.into(),
        },
    };
    let campaign = run_campaign(&config)?;
    let tuning = tune_all(args.n, &campaign.results, &args.tune, global.epsilon_exponent)?;

    let mut out = Outputs::new(global.seed, global.threads);
    let digests: Vec<String> = campaign
        .summary
        .records
        .par_iter()
        .map(|r| generate_instance(args.n, campaign.summary.m, args.k, &r.instance_rng).map(|i| instance_digest(&i)))
        .collect::<Result<_, _>>()?;
    out.derived_seeds = campaign
        .summary
        .records
        .iter()
        .zip(digests)
        .map(|(r, d)| DerivedSeed {
            label: format!("run-{}", r.index),
            instance: Some(r.instance_rng),
            algorithm: Some(r.algorithm_rng),
            campaign_seed: None,
            instance_digest: Some(d),
        })
        .collect();

    let report = SimulateReport {
        rounding_rule: ROUNDING_RULE.to_string(),
        summary: campaign.summary,
        tuning,
    };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');

    let Some(dir) = args.out_dir.as_deref() else {
        return out.emit(None, &json);
    };
    out.write(&dir.join("summary.json"), &json)?;
    if global.format == Format::Csv {
        out.write(&dir.join("runs.csv"), runs_csv(&report.summary.records).as_bytes())?;
    }
    if args.r > 0.0 {
        out.write(&dir.join("reference.csv"), reference_csv(args.r, schedule)?.as_bytes())?;
    }
    for (i, res) in campaign.results.iter().enumerate() {
        if args.trajectories {
            if let Some(t) = &res.trajectory {
                out.write(&dir.join(format!("trajectories/run-{i:04}.csv")), t.to_csv(true).as_bytes())?;
            }
        }
        if let Some(log) = res.log.as_ref().filter(|_| args.log) {
            let mut lines = Vec::new();
            for entry in log {
                serde_json::to_writer(&mut lines, entry)?;
                lines.push(b'\n');
            }
            out.write(&dir.join(format!("logs/run-{i:04}.jsonl")), &lines)?;
        }
    }
    out.finish(Some(&manifest_path(dir)))?;
    Ok(())
}

pub fn manifest_path(dir: &Path) -> std::path::PathBuf {
    dir.join("manifest.json")
}

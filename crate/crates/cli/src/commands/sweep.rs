use std::fmt::Write;
use std::fs;
use std::path::PathBuf;

use overlap_ec::algo::{EndgameMode, FOfN, RunOptions};
use overlap_ec::campaign::{run_campaign, CampaignConfig};
use overlap_ec::trajectory::ScheduleKind;
use overlap_ec::RngSpec;
use serde::{Deserialize, Serialize};

use crate::args::{Format, GlobalArgs, SweepArgs};
use crate::commands::simulate::tune_all;
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_for, DerivedSeed, Outputs};

pub const CSV_HEADER: &str = "n,r,k,m,runs,successes,success_fraction,t2_predicted,t2_mean,raw_overlap_mean,\
mean_degree_mean,max_component,q,epsilon_n,tuned,tuned_fraction";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub r: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    /// Overlap targets; every returned pair is tuned to each of them.
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default = "default_runs")]
    pub runs_per_point: usize,
    #[serde(default)]
    pub schedule: ScheduleKind,
    #[serde(default)]
    pub endgame: EndgameMode,
    /// Overrides the global `--epsilon-exponent`.
    pub epsilon_exponent: Option<f64>,
    /// Overrides the global `--f-of-n`.
    pub f_of_n: Option<String>,
    pub output: Option<PathBuf>,
}

fn default_k() -> Vec<usize> {
    vec![3]
}

fn default_runs() -> usize {
    10
}

impl SweepConfig {
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Invalid(m));
        if self.n.is_empty() || self.r.is_empty() || self.k.is_empty() {
            return bad("sweep grids over n, r and k must be non-empty".into());
        }
        if self.runs_per_point == 0 {
            return bad("runs_per_point must be at least 1".into());
        }
        if let Some(&k) = self.k.iter().find(|&&k| k < 3) {
            return bad(format!("k={k} must be at least 3"));
        }
        let k_max = self.k.iter().copied().max().unwrap_or(3);
        if let Some(&n) = self.n.iter().find(|&&n| n < k_max) {
            return bad(format!("n={n} is smaller than k={k_max}"));
        }
        if let Some(&r) = self.r.iter().find(|&&r| !(r >= 0.0) || !r.is_finite()) {
            return bad(format!("clause density r={r} must be finite and >= 0"));
        }
        if let Some(&q) = self.q.iter().find(|&&q| !(0.0..=1.0).contains(&q)) {
            return bad(format!("overlap target q={q} outside [0, 1]"));
        }
        if let Some(e) = self.epsilon_exponent.filter(|e| !(e.is_finite() && *e >= 0.0)) {
            return bad(format!("epsilon exponent {e} must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub r: f64,
    pub k: usize,
    pub m: usize,
    pub runs: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub t2_predicted: f64,
    pub t2_mean: Option<f64>,
    pub raw_overlap_mean: Option<f64>,
    pub mean_degree_mean: Option<f64>,
    pub max_component: Option<usize>,
    pub q: Option<f64>,
    pub epsilon_n: Option<f64>,
    pub tuned: Option<usize>,
    /// Landed pairs over all runs at the point.
    pub tuned_fraction: Option<f64>,
}

fn load_config(global: &GlobalArgs, args: &SweepArgs) -> CliResult<SweepConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            toml::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?
        }
        None => SweepConfig {
            n: Vec::new(),
            r: Vec::new(),
            k: default_k(),
            q: Vec::new(),
            runs_per_point: default_runs(),
            schedule: ScheduleKind::Default,
            endgame: EndgameMode::Drain,
            epsilon_exponent: None,
            f_of_n: None,
            output: None,
        },
    };
    if !args.n.is_empty() {
        cfg.n = args.n.clone();
    }
    if !args.r.is_empty() {
        cfg.r = args.r.clone();
    }
    if !args.k.is_empty() {
        cfg.k = args.k.clone();
    }
    if !args.q.is_empty() {
        cfg.q = args.q.clone();
    }
    if let Some(runs) = args.runs {
        cfg.runs_per_point = runs;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    cfg.epsilon_exponent.get_or_insert(global.epsilon_exponent);
    cfg.validate()?;
    Ok(cfg)
}

fn cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.r,
            r.k,
            r.m,
            r.runs,
            r.successes,
            r.success_fraction,
            r.t2_predicted,
            cell(r.t2_mean),
            cell(r.raw_overlap_mean),
            cell(r.mean_degree_mean),
            cell(r.max_component),
            cell(r.q),
            cell(r.epsilon_n),
            cell(r.tuned),
            cell(r.tuned_fraction)
        )
        .unwrap();
    }
    s
}

/// Point `j` of the grid (n outermost, then r, then k) runs its campaign
/// under a seed mixed from the master seed and `j`.
pub fn point_seed(master: u64, j: usize) -> u64 {
    RngSpec::new(master, j as u64).child(0).seed
}

pub fn run(global: &GlobalArgs, args: &SweepArgs) -> CliResult<()> {
    let cfg = load_config(global, args)?;
    let f_n: FOfN = match &cfg.f_of_n {
        Some(s) => s.parse()?,
        None => global.f_of_n,
    };
    let exponent = cfg.epsilon_exponent.unwrap_or(global.epsilon_exponent);
    let mut out = Outputs::new(global.seed, global.threads);
    let mut rows = Vec::new();
    let mut j = 0;
    for &n in &cfg.n {
        for &r in &cfg.r {
            for &k in &cfg.k {
                let seed = point_seed(global.seed, j);
                out.derived_seeds.push(DerivedSeed {
                    label: format!("point-{j}: n={n} r={r} k={k}"),
                    instance: None,
                    algorithm: None,
                    campaign_seed: Some(seed),
                    instance_digest: None,
                });
                j += 1;
                let campaign = run_campaign(&CampaignConfig {
                    n,
                    r,
                    k,
                    runs: cfg.runs_per_point,
                    seed,
                    schedule: cfg.schedule,
                    options: RunOptions {
                        f_n,
                        record_trajectory: true,
                        record_log: false,
                        endgame: cfg.endgame,
                    },
                })?;
                let s = &campaign.summary;
                let base = SweepRow {
                    n,
                    r,
                    k,
                    m: s.m,
                    runs: cfg.runs_per_point,
                    successes: s.successes,
                    success_fraction: s.success_fraction.unwrap_or(0.0),
                    t2_predicted: s.t2_predicted,
                    t2_mean: s.t2_emp.map(|d| d.mean),
                    raw_overlap_mean: s.raw_overlap.map(|d| d.mean),
                    mean_degree_mean: s.mean_degree.map(|d| d.mean),
                    max_component: s.max_component,
                    q: None,
                    epsilon_n: None,
                    tuned: None,
                    tuned_fraction: None,
                };
                if cfg.q.is_empty() {
                    rows.push(base);
                    continue;
                }
                for t in tune_all(n, &campaign.results, &cfg.q, exponent)? {
                    rows.push(SweepRow {
                        q: Some(t.q),
                        epsilon_n: Some(t.epsilon_n),
                        tuned: Some(t.landed),
                        tuned_fraction: Some(t.landed as f64 / cfg.runs_per_point as f64),
                        ..base.clone()
                    });
                }
            }
        }
    }
    let data = match global.format {
        Format::Csv => to_csv(&rows).into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rows)?;
            v.push(b'\n');
            v
        }
    };
    out.emit(cfg.output.as_deref(), &data)?;
    out.finish(cfg.output.as_deref().map(manifest_for).as_deref())?;
    Ok(())
}

use std::fmt::Write;

use overlap_ec::trajectory::r_lb_eval;
use overlap_ec::upper::{q_k, r_up_solve, stationary_domain, RUpConfig};
use overlap_ec::EcError;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BoundsArgs, Format, GlobalArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_for, Outputs};

pub const CSV_HEADER: &str = "q,q_k,root,x_max,g_r_up,r_up,residual,r_lb,status";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub q: f64,
    pub q_k: f64,
    pub root: Option<f64>,
    pub x_max: Option<f64>,
    pub g_r_up: Option<f64>,
    /// Withheld unless `|residual| <= tol`.
    pub r_up: Option<f64>,
    pub residual: Option<f64>,
    /// Only defined for k = 3.
    pub r_lb: Option<f64>,
    pub status: String,
}

pub fn q_values(args: &BoundsArgs) -> CliResult<Vec<f64>> {
    let qs = if !args.q.is_empty() {
        args.q.clone()
    } else if args.q_points == 1 {
        vec![args.q_min]
    } else {
        let step = (args.q_max - args.q_min) / (args.q_points - 1) as f64;
        (0..args.q_points).map(|i| args.q_min + step * i as f64).collect()
    };
    if qs.is_empty() || qs.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(CliError::Invalid("every q must lie in (0, 1)".into()));
    }
    Ok(qs)
}

pub fn bound_row(k: usize, q: f64, cfg: &RUpConfig) -> BoundsRow {
    let mut row = BoundsRow {
        q,
        q_k: q_k(k),
        root: None,
        x_max: None,
        g_r_up: None,
        r_up: None,
        residual: None,
        r_lb: if k == 3 { r_lb_eval(q).ok() } else { None },
        status: String::new(),
    };
    match stationary_domain(k, q) {
        Ok(d) => {
            row.root = Some(d.root);
            row.x_max = Some(d.x_max);
        }
        Err(_) => {
            row.status = "domain-error".into();
            return row;
        }
    }
    row.status = match r_up_solve(k, q, cfg) {
        Ok(b) => {
            row.residual = Some(b.residual);
            if b.residual.abs() <= cfg.tol {
                row.r_up = Some(b.r_value);
                row.g_r_up = Some(b.g_value);
                "ok".into()
            } else {
                "residual-above-tol".into()
            }
        }
        Err(EcError::NoSignChange { .. }) => "no-sign-change".into(),
        Err(EcError::Numerical { residual, .. }) if residual.is_finite() => {
            row.residual = Some(residual);
            "residual-above-tol".into()
        }
        Err(_) => "numerical-failure".into(),
    };
    row
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(rows: &[BoundsRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.q,
            r.q_k,
            cell(r.root),
            cell(r.x_max),
            cell(r.g_r_up),
            cell(r.r_up),
            cell(r.residual),
            cell(r.r_lb),
            r.status
        )
        .unwrap();
    }
    s
}

pub fn run(global: &GlobalArgs, args: &BoundsArgs) -> CliResult<()> {
    if args.k < 3 {
        return Err(CliError::Invalid(format!("k={} must be at least 3", args.k)));
    }
    if !(args.tol > 0.0) || !(args.domain_tol > 0.0) || !(args.r_max > 0.0) || args.grid_points == 0 {
        return Err(CliError::Invalid("tolerances, r_max and grid_points must be positive".into()));
    }
    let cfg = RUpConfig {
        r_max: args.r_max,
        grid_points: args.grid_points,
        tol: args.tol,
        domain_tol: args.domain_tol,
        ..RUpConfig::default()
    };
    let qs = q_values(args)?;
    let rows: Vec<BoundsRow> = qs.par_iter().map(|&q| bound_row(args.k, q, &cfg)).collect();

    let data = match global.format {
        Format::Csv => to_csv(&rows).into_bytes(),
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rows)?;
            v.push(b'\n');
            v
        }
    };
    let mut out = Outputs::new(global.seed, global.threads);
    out.emit(args.out.as_deref(), &data)?;
    out.finish(args.out.as_deref().map(manifest_for).as_deref())?;

    let flagged = rows.iter().filter(|r| r.status != "ok").count();
    if flagged > 0 {
        return Err(CliError::Numerical(format!("{flagged} of {} rows flagged", rows.len())));
    }
    Ok(())
}

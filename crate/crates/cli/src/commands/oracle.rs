use std::fmt::Write;
use std::fs;

use overlap_ec::oracle::{
    cluster_decomposition, enumerate_solutions, expected_z, format_ratio, hypergraph_components, DistanceHistogram,
    EnumerationLimits, HistogramMethod,
};
use overlap_ec::{generate_instance, EcInstance, OverlapWindow, RngSpec};
use serde::Serialize;

use crate::args::{Format, GlobalArgs, OracleArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::{instance_digest, manifest_for, DerivedSeed, Outputs};

pub const HISTOGRAM_CSV_HEADER: &str = "distance,overlap,ordered_pairs";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowReport {
    pub q: f64,
    pub epsilon_n: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub l: usize,
    pub components: usize,
    pub sizes: Vec<usize>,
    pub diameters: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpectedZSummary {
    pub value: f64,
    pub ln_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramRow {
    pub distance: usize,
    pub overlap: String,
    pub ordered_pairs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub instance_digest: String,
    pub solutions: usize,
    pub window: WindowReport,
    /// Ordered pairs of distinct solutions with overlap in the window.
    pub z: u64,
    /// The same count with `A = B` pairs included.
    pub z_with_equal: u64,
    /// Overlaps of distinct solution pairs, as reduced fractions.
    pub support: Vec<String>,
    pub histogram: Vec<HistogramRow>,
    pub cluster: ClusterSummary,
    pub hypergraph_component_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_z: Option<ExpectedZSummary>,
}

fn load_instance(global: &GlobalArgs, args: &OracleArgs) -> CliResult<(EcInstance, Option<DerivedSeed>)> {
    if let Some(path) = &args.instance {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        return Ok((EcInstance::parse_text(&text)?, None));
    }
    let (Some(n), Some(m)) = (args.n, args.m) else {
        return Err(CliError::Invalid("give --instance or both -n and -m".into()));
    };
    let spec = RngSpec::new(global.seed, 0);
    let inst = generate_instance(n, m, args.k, &spec)?;
    let seed = DerivedSeed {
        label: "instance".into(),
        instance: Some(spec),
        algorithm: None,
        campaign_seed: None,
        instance_digest: Some(instance_digest(&inst)),
    };
    Ok((inst, Some(seed)))
}

pub fn report(inst: &EcInstance, window: &OverlapWindow, l: Option<usize>, with_expected: bool, max_vars: usize) -> CliResult<OracleReport> {
    let limits = EnumerationLimits {
        max_vars,
        ..EnumerationLimits::default()
    };
    let n = inst.n();
    let sols = enumerate_solutions(inst, &limits)?;
    let hist = DistanceHistogram::of(&sols, HistogramMethod::Auto);
    let mut comp_sizes: Vec<usize> = hypergraph_components(inst).iter().map(Vec::len).collect();
    comp_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let l = l.unwrap_or_else(|| comp_sizes.first().copied().unwrap_or(1));
    let clusters = cluster_decomposition(&sols, l);
    let (lo, hi) = window.bounds(n);
    let histogram = hist
        .counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(d, &c)| HistogramRow {
            distance: d,
            overlap: format_ratio(&num_ratio(n - d, n)),
            ordered_pairs: c,
        })
        .collect();
    let expected = if with_expected {
        let ez = expected_z(n, inst.m(), inst.k(), window)?;
        Some(ExpectedZSummary {
            value: ez.value,
            ln_value: ez.ln_value,
        })
    } else {
        None
    };
    Ok(OracleReport {
        n,
        m: inst.m(),
        k: inst.k(),
        instance_digest: instance_digest(inst),
        solutions: sols.len(),
        window: WindowReport {
            q: window.q,
            epsilon_n: window.epsilon_n,
            lo,
            hi,
        },
        z: hist.count_in_window(window, false),
        z_with_equal: hist.count_in_window(window, true),
        support: hist.support().iter().map(format_ratio).collect(),
        histogram,
        cluster: ClusterSummary {
            l,
            components: clusters.component_count(),
            sizes: clusters.components.iter().map(Vec::len).collect(),
            diameters: clusters.diameters.clone(),
        },
        hypergraph_component_sizes: comp_sizes,
        expected_z: expected,
    })
}

fn num_ratio(a: usize, n: usize) -> num_rational::Ratio<u64> {
    num_rational::Ratio::new(a as u64, n.max(1) as u64)
}

pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut s = String::from(HISTOGRAM_CSV_HEADER);
    s.push('\n');
    for r in rows {
        writeln!(s, "{},{},{}", r.distance, r.overlap, r.ordered_pairs).unwrap();
    }
    s
}

pub fn run(global: &GlobalArgs, args: &OracleArgs) -> CliResult<()> {
    let (inst, seed) = load_instance(global, args)?;
    let n = inst.n();
    let window = match args.half_width {
        Some(h) => OverlapWindow::with_half_width(args.q, n, h)?,
        None => OverlapWindow::with_exponent(args.q, n, global.epsilon_exponent)?,
    };
    let rep = report(&inst, &window, args.l, args.expected_z, args.max_vars)?;
    let data = match global.format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rep)?;
            v.push(b'\n');
            v
        }
        Format::Csv => histogram_csv(&rep.histogram).into_bytes(),
    };
    let mut out = Outputs::new(global.seed, global.threads);
    out.instance_digest = Some(rep.instance_digest.clone());
    out.derived_seeds.extend(seed);
    out.emit(args.out.as_deref(), &data)?;
    out.finish(args.out.as_deref().map(manifest_for).as_deref())?;
    Ok(())
}

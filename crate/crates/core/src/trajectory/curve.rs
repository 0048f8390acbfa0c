use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::closed_forms;

pub const CSV_HEADER: &str = "t,c3,c2,p,n,mode,r,schedule-id";

/// Scaled counts after `t * n` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub c3: f64,
    pub c2: f64,
    pub p: f64,
    pub n: f64,
}

impl TrajectorySample {
    pub fn get(&self, field: Field) -> f64 {
        match field {
            Field::C3 => self.c3,
            Field::C2 => self.c2,
            Field::P => self.p,
            Field::N => self.n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    C3,
    C2,
    P,
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    ClosedForm,
    PaperOde,
    RecurrenceOde,
    Empirical,
}

impl CurveMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveMode::ClosedForm => "closed-form",
            CurveMode::PaperOde => "paper-ode",
            CurveMode::RecurrenceOde => "recurrence-ode",
            CurveMode::Empirical => "empirical",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCurve {
    pub samples: Vec<TrajectorySample>,
    pub mode: CurveMode,
    pub r: f64,
    pub schedule_id: String,
}

impl TrajectoryCurve {
    pub fn t_end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn at(&self, t: f64) -> Option<TrajectorySample> {
        let s = &self.samples;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|x| x.t <= t);
        if i == s.len() {
            return Some(s[i - 1]);
        }
        let (a, b) = (s[i - 1], s[i]);
        let w = (t - a.t) / (b.t - a.t);
        let lerp = |x: f64, y: f64| x + w * (y - x);
        Some(TrajectorySample {
            t,
            c3: lerp(a.c3, b.c3),
            c2: lerp(a.c2, b.c2),
            p: lerp(a.p, b.p),
            n: lerp(a.n, b.n),
        })
    }

    /// `max |self(t) - f(t)|` over samples with `t <= t_max`.
    pub fn sup_distance_to(&self, field: Field, t_max: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t <= t_max)
            .map(|s| (s.get(field) - f(s.t)).abs())
            .fold(0.0, f64::max)
    }

    /// Sup distance at this curve's samples up to `t_max`, against `other`
    /// interpolated; samples outside `other`'s range are skipped.
    pub fn sup_distance(&self, other: &TrajectoryCurve, field: Field, t_max: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t <= t_max)
            .filter_map(|s| other.at(s.t).map(|o| (s.get(field) - o.get(field)).abs()))
            .fold(0.0, f64::max)
    }

    /// CSV rows in [`CSV_HEADER`] order, header first when requested.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            out.push_str(CSV_HEADER);
            out.push('\n');
        }
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.t,
                s.c3,
                s.c2,
                s.p,
                s.n,
                self.mode.as_str(),
                self.r,
                self.schedule_id
            )
            .unwrap();
        }
        out
    }
}

/// Closed forms sampled every `step` on `[0, t_end]`; queue columns are 0.
pub fn closed_form_curve(r: f64, step: f64, t_end: f64) -> TrajectoryCurve {
    let count = (t_end / step).floor() as usize;
    let mut samples: Vec<TrajectorySample> = (0..=count)
        .map(|i| i as f64 * step)
        .chain((t_end - count as f64 * step > 1e-12).then_some(t_end))
        .map(|t| {
            let (c3, c2) = closed_forms(t, r);
            TrajectorySample { t, c3, c2, p: 0.0, n: 0.0 }
        })
        .collect();
    samples.dedup_by(|a, b| a.t == b.t);
    TrajectoryCurve {
        samples,
        mode: CurveMode::ClosedForm,
        r,
        schedule_id: "default".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_distance() {
        let c = closed_form_curve(0.1, 0.01, 0.2);
        assert_eq!(c.samples.len(), 21);
        let mid = c.at(0.105).unwrap();
        let (a, b) = (c.samples[10], c.samples[11]);
        assert!((mid.c3 - (a.c3 + b.c3) / 2.0).abs() < 1e-15);
        assert!(c.at(0.3).is_none());
        assert_eq!(c.sup_distance(&c, Field::C2, 1.0), 0.0);
        let d = c.sup_distance_to(Field::C3, 1.0, |t| closed_forms(t, 0.1).0 + 0.5);
        assert!((d - 0.5).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let c = closed_form_curve(0.1, 0.1, 0.2);
        let csv = c.to_csv(true);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,c3,c2,p,n,mode,r,schedule-id");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0.1,0,0,0,closed-form,0.1,default"));
        assert_eq!(serde_json::to_string(&CurveMode::RecurrenceOde).unwrap(), "\"recurrence-ode\"");
    }
}

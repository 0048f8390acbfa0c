use serde::{Deserialize, Serialize};

use super::closed_forms;
use crate::error::{EcError, Result};

/// Branch probabilities at one time point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lambdas {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// True when raw values left `[0, 1]` (or summed above 1) and were clamped.
    pub clamped: bool,
}

impl Lambdas {
    pub fn as_array(&self) -> [f64; 3] {
        [self.l1, self.l2, self.l3]
    }
}

/// Branch probabilities of the lazy algorithm as functions of scaled time.
pub trait Schedule: Send + Sync {
    fn lambdas(&self, t: f64) -> Lambdas;
    fn id(&self) -> String;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DefaultSchedule;

impl Schedule for DefaultSchedule {
    fn lambdas(&self, _t: f64) -> Lambdas {
        let third = 1.0 / 3.0;
        Lambdas { l1: third, l2: third, l3: third, clamped: false }
    }

    fn id(&self) -> String {
        "default".into()
    }
}

/// `l1 = (2c2+e)/(1-t+2c2)`, `l2 = (2c2+e)(6c3+2c2+e)/((1-t)(1-t+2c2))`,
/// `l3 = 1 - l1 - l2`, with `c2, c3` taken from the default closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveSketch {
    pub epsilon: f64,
    pub r: f64,
}

impl Schedule for AdaptiveSketch {
    fn lambdas(&self, t: f64) -> Lambdas {
        let (c3, c2) = closed_forms(t, self.r);
        let (c3, c2) = (c3.max(0.0), c2.max(0.0));
        let e = self.epsilon;
        let s = 1.0 - t;
        let l1 = (2.0 * c2 + e) / (s + 2.0 * c2);
        let l2 = (2.0 * c2 + e) * (6.0 * c3 + 2.0 * c2 + e) / (s * (s + 2.0 * c2));
        clamp_lambdas(l1, l2, 1.0 - l1 - l2)
    }

    fn id(&self) -> String {
        format!("adaptive-sketch(eps={})", self.epsilon)
    }
}

fn clamp_lambdas(l1: f64, l2: f64, l3: f64) -> Lambdas {
    let c = |x: f64| if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
    let (a, b, d) = (c(l1), c(l2), c(l3));
    let mut clamped = a != l1 || b != l2 || d != l3;
    let sum = a + b + d;
    if sum > 1.0 {
        clamped = true;
        return Lambdas { l1: a / sum, l2: b / sum, l3: d / sum, clamped };
    }
    Lambdas { l1: a, l2: b, l3: d, clamped }
}

/// Wraps a closure returning raw `(l1, l2, l3)`; values are clamped like the
/// adaptive schedule.
pub struct FnSchedule<F> {
    f: F,
    id: String,
}

impl<F: Fn(f64) -> (f64, f64, f64) + Send + Sync> FnSchedule<F> {
    pub fn new(id: impl Into<String>, f: F) -> Self {
        FnSchedule { f, id: id.into() }
    }
}

impl<F: Fn(f64) -> (f64, f64, f64) + Send + Sync> Schedule for FnSchedule<F> {
    fn lambdas(&self, t: f64) -> Lambdas {
        let (a, b, c) = (self.f)(t);
        clamp_lambdas(a, b, c)
    }

    fn id(&self) -> String {
        self.id.clone()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleKind {
    #[default]
    Default,
    AdaptiveSketch { epsilon: f64 },
}

/// Builds a schedule; the adaptive sketch needs the clause density `r`.
pub fn make_schedule(kind: ScheduleKind, r: f64) -> Result<Box<dyn Schedule>> {
    match kind {
        ScheduleKind::Default => Ok(Box::new(DefaultSchedule)),
        ScheduleKind::AdaptiveSketch { epsilon } => {
            if !(epsilon > 0.0) {
                return Err(EcError::invalid(format!("adaptive epsilon={epsilon} must be positive")));
            }
            Ok(Box::new(AdaptiveSketch { epsilon, r }))
        }
    }
}

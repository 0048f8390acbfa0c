use serde::{Deserialize, Serialize};

use super::curve::{CurveMode, TrajectoryCurve, TrajectorySample};
use super::schedule::Schedule;
use crate::error::{EcError, Result};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const MAX_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OdeMode {
    /// `c3' = -l3 - 3c3/(1-t)`, `c2' = -2c2/(1-t) + (l2+l3) 3c3/(1-t)`.
    PaperOde,
    /// As above plus `l3` in `c2'`: the clause chosen by a largest-clause
    /// step itself becomes a 1-in-2 clause.
    RecurrenceOde,
}

/// State `[c3, c2, p, n]`.
fn derivative(mode: OdeMode, schedule: &dyn Schedule, t: f64, y: [f64; 4]) -> [f64; 4] {
    let l = schedule.lambdas(t);
    let s = 1.0 - t;
    let [c3, c2, p, n] = y;
    let dc3 = -l.l3 - 3.0 * c3 / s;
    let mut dc2 = -2.0 * c2 / s + (l.l2 + l.l3) * 3.0 * c3 / s;
    if mode == OdeMode::RecurrenceOde {
        dc2 += l.l3;
    }
    // Queues: inflow from the branches that create units, one unit served
    // per selected branch, and random hits on queued variables.
    let reflect = |x: f64, d: f64| if x <= 0.0 && d < 0.0 { 0.0 } else { d };
    let dp = reflect(p, (l.l2 + l.l3) * 2.0 * c2 / s - l.l1 - p / s);
    let dn = reflect(n, l.l1 * (6.0 * c3 + 2.0 * c2) / s - l.l2 - n / s);
    [dc3, dc2, dp, dn]
}

fn axpy(y: [f64; 4], h: f64, k: [f64; 4]) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Classical RK4 from `(c3, c2, p, n) = (r, 0, 0, 0)` at `t = 0`, stopping
/// at the first `c3 <= 0` (crossing located by linear interpolation) or
/// before `t` reaches 1.
pub fn ode_integrate(r: f64, schedule: &dyn Schedule, mode: OdeMode, step: f64) -> Result<TrajectoryCurve> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(EcError::invalid(format!("clause density r={r} must be positive")));
    }
    if !(step > 0.0) || step > MAX_STEP {
        return Err(EcError::invalid(format!("step={step} must lie in (0, {MAX_STEP}]")));
    }
    let sample = |t: f64, y: [f64; 4]| TrajectorySample { t, c3: y[0], c2: y[1], p: y[2], n: y[3] };
    let mut y = [r, 0.0, 0.0, 0.0];
    let mut samples = vec![sample(0.0, y)];
    let mut i: u64 = 0;
    loop {
        let t = i as f64 * step;
        if t + 2.0 * step >= 1.0 {
            break;
        }
        let h = step;
        let k1 = derivative(mode, schedule, t, y);
        let k2 = derivative(mode, schedule, t + h / 2.0, axpy(y, h / 2.0, k1));
        let k3 = derivative(mode, schedule, t + h / 2.0, axpy(y, h / 2.0, k2));
        let k4 = derivative(mode, schedule, t + h, axpy(y, h, k3));
        let mut next = y;
        for j in 0..4 {
            next[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        next[2] = next[2].max(0.0);
        next[3] = next[3].max(0.0);
        i += 1;
        if next[0] <= 0.0 {
            let w = y[0] / (y[0] - next[0]);
            let mut cross = [0.0; 4];
            for j in 0..4 {
                cross[j] = y[j] + w * (next[j] - y[j]);
            }
            cross[0] = 0.0;
            samples.push(sample(t + w * h, cross));
            break;
        }
        y = next;
        samples.push(sample(i as f64 * step, y));
    }
    Ok(TrajectoryCurve {
        samples,
        mode: match mode {
            OdeMode::PaperOde => CurveMode::PaperOde,
            OdeMode::RecurrenceOde => CurveMode::RecurrenceOde,
        },
        r,
        schedule_id: schedule.id(),
    })
}

//! Mean-field predictions for the lazy largest-clause algorithm on 1-in-3
//! formulas, and the lower bound `r_lb(q)`.

mod curve;
mod ode;
mod schedule;

pub use curve::{closed_form_curve, CurveMode, Field, TrajectoryCurve, TrajectorySample, CSV_HEADER};
pub use ode::{ode_integrate, OdeMode, DEFAULT_STEP, MAX_STEP};
pub use schedule::{make_schedule, AdaptiveSketch, DefaultSchedule, FnSchedule, Lambdas, Schedule, ScheduleKind};

use serde::Serialize;

use crate::error::{EcError, Result};

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(EcError::invalid(format!("clause density r={r} must be positive")));
    }
    Ok(())
}

/// `(c3(t), c2(t))` for the default schedule.
pub fn closed_forms(t: f64, r: f64) -> (f64, f64) {
    let s = 1.0 - t;
    let a = r + 1.0 / 6.0;
    let c3 = a * s * s * s - s / 6.0;
    let c2 = s * s / 3.0 - s / 3.0 + 2.0 * a * t * s * s;
    (c3, c2)
}

/// First zero of the closed-form `c3`: `1 - 1/sqrt(6r+1)`.
pub fn stopping_time_t2(r: f64) -> f64 {
    1.0 - 1.0 / (6.0 * r + 1.0).sqrt()
}

/// Unit-clause flows of the default schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Flows {
    /// `(2/3) 2c2/(1-t) + (1/3) 6c3/(1-t)`.
    pub positive: f64,
    /// `(1/3) 2c2/(1-t)`.
    pub negative: f64,
}

pub fn flows(t: f64, r: f64) -> Result<Flows> {
    check_r(r)?;
    if !(0.0..1.0).contains(&t) {
        return Err(EcError::Domain { x: t, lo: 0.0, hi: 1.0 });
    }
    let (c3, c2) = closed_forms(t, r);
    let s = 1.0 - t;
    Ok(Flows {
        positive: (2.0 / 3.0) * 2.0 * c2 / s + (1.0 / 3.0) * 6.0 * c3 / s,
        negative: (1.0 / 3.0) * 2.0 * c2 / s,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EndgameDensity {
    /// `2 c2(t2) / (1 - t2)` from the closed forms.
    pub mu: f64,
    /// The same ratio when `c2` also receives the clause converted by each
    /// largest-clause step, i.e. `mu + 2 t2 / 3`.
    pub mu_recurrence: f64,
    /// Set when `r >= 1/6` or `mu >= 1`.
    pub supercritical: bool,
}

pub fn endgame_density_mu(r: f64) -> Result<EndgameDensity> {
    check_r(r)?;
    let t2 = stopping_time_t2(r);
    let (_, c2) = closed_forms(t2, r);
    let mu = 2.0 * c2 / (1.0 - t2);
    Ok(EndgameDensity {
        mu,
        mu_recurrence: mu + 2.0 * t2 / 3.0,
        supercritical: r >= 1.0 / 6.0 || mu >= 1.0,
    })
}

/// `(1/6)(1/(1-q)^2 - 1)` below `q = 1 - 1/sqrt(2)`, `1/6` above.
pub fn r_lb_eval(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(EcError::invalid(format!("overlap q={q} outside (0,1)")));
    }
    if q < 1.0 - std::f64::consts::FRAC_1_SQRT_2 {
        Ok((1.0 / ((1.0 - q) * (1.0 - q)) - 1.0) / 6.0)
    } else {
        Ok(1.0 / 6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        let (c3, c2) = closed_forms(0.0, 0.37);
        assert!((c3 - 0.37).abs() < 1e-15 && c2.abs() < 1e-15);
        let t2 = stopping_time_t2(0.1);
        assert!((t2 - 0.209431).abs() < 1e-6);
        // (r + 1/6)(1-t)^2 = 1/6 at t2
        assert!(((0.1 + 1.0 / 6.0) * (1.0 - t2).powi(2) - 1.0 / 6.0).abs() < 1e-15);
        let (c3, c2) = closed_forms(t2, 0.1);
        assert!(c3.abs() < 1e-12);
        assert!((c2 - 0.014620).abs() < 1e-6);
        assert!((stopping_time_t2(1.0 / 6.0) - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!(stopping_time_t2(1e-12) < 1e-11);
    }

    #[test]
    fn closed_forms_solve_the_default_ode() {
        for &r in &[0.02, 0.1, 0.16] {
            let t2 = stopping_time_t2(r);
            for i in 0..200 {
                let t = t2 * i as f64 / 200.0;
                let h = 1e-5;
                let (a3, a2) = closed_forms(t + h, r);
                let (b3, b2) = closed_forms(t - h, r);
                let (c3, c2) = closed_forms(t, r);
                let d3 = (a3 - b3) / (2.0 * h);
                let d2 = (a2 - b2) / (2.0 * h);
                let s = 1.0 - t;
                assert!((d3 - (-1.0 / 3.0 - 3.0 * c3 / s)).abs() < 1e-9);
                assert!((d2 - (-2.0 * c2 / s + (2.0 / 3.0) * 3.0 * c3 / s)).abs() < 1e-9);
                if i > 0 {
                    assert!(c3 > 0.0);
                }
            }
        }
    }

    #[test]
    fn flow_examples() {
        let f = flows(0.0, 0.1).unwrap();
        assert!((f.positive - 0.2).abs() < 1e-15);
        assert_eq!(f.negative, 0.0);
        let r: f64 = 0.1;
        let t2 = stopping_time_t2(r);
        let mut best = (0.0, 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..=20_000 {
            let t = t2 * i as f64 / 20_000.0;
            if t >= t2 {
                break;
            }
            let f = flows(t, r).unwrap();
            let alt = (2.0 * t / 9.0) * ((6.0 * r + 1.0) * (1.0 - t) - 1.0);
            assert!((f.negative - alt).abs() < 1e-14);
            if f.negative > best.1 {
                best = (t, f.negative);
            }
            assert!(f.positive <= prev);
            prev = f.positive;
        }
        assert!((best.0 - 0.1875).abs() < 2e-5);
        assert!((best.1 - 0.0125).abs() < 1e-9);
        assert!(flows(1.0, 0.1).is_err());
    }

    #[test]
    fn mu_examples() {
        let e = endgame_density_mu(0.1).unwrap();
        assert!((e.mu - 0.036987).abs() < 1e-6);
        let t2 = stopping_time_t2(0.1);
        let alt = (2.0 * t2 / 3.0) * (1.6f64.sqrt() - 1.0);
        assert!((e.mu - alt).abs() < 1e-14);
        assert!(!e.supercritical);
        assert!(endgame_density_mu(1e-9).unwrap().mu < 1e-9);
        let mut prev = 0.0;
        for i in 1..1000 {
            let mu = endgame_density_mu(i as f64 / 6000.0).unwrap().mu;
            assert!(mu < 1.0 && mu > prev);
            prev = mu;
        }
        assert!(endgame_density_mu(0.2).unwrap().supercritical);
    }

    #[test]
    fn r_lb_examples() {
        assert_eq!(r_lb_eval(0.5).unwrap(), 1.0 / 6.0);
        assert!((r_lb_eval(0.1).unwrap() - 0.039095).abs() < 1e-6);
        assert!(r_lb_eval(1e-9).unwrap() < 1e-8);
        // continuous at the breakpoint
        let q0 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        assert!((r_lb_eval(q0 - 1e-12).unwrap() - 1.0 / 6.0).abs() < 1e-10);
        assert!(r_lb_eval(0.0).is_err() && r_lb_eval(1.0).is_err());
    }
}

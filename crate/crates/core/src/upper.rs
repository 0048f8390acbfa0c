//! First-moment machinery for the upper bound on the overlap threshold.
//!
//! The stationary function `F_{k,q}` maps `(q/2, x_max)` onto `(0, inf)`;
//! its inverse locates the maximiser `alpha* = G(r)` of the exponent
//! `t(alpha)`, and `r_up(q, k)` is the last zero of `r -> t(G(r))`.
//!
//! Points of the domain are carried in log-odds form,
//! `u = ln(x / (q - x))`. Near the right end of the domain `q - x` can
//! drop far below the spacing of doubles around `q` (for `q = 0.05` and
//! `r = 5`, `q - x ~ q e^{-100}`), so `x` itself cannot be stored to the
//! precision the inverse needs while `u` can.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_u128, ln_binomial, log_add_exp};
use crate::error::{EcError, Result};

pub const DEFAULT_DOMAIN_TOL: f64 = 1e-12;
pub const DEFAULT_R_UP_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200;

fn check_kq(k: usize, q: f64) -> Result<()> {
    if k < 3 {
        return Err(EcError::invalid(format!("k={k} must be at least 3")));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(EcError::invalid(format!("q={q} must lie in (0,1)")));
    }
    Ok(())
}

/// `q_k = sqrt((k-1)(k-2)) / (2 + sqrt((k-1)(k-2)))`.
pub fn q_k(k: usize) -> f64 {
    let s = (((k - 1) * (k - 2)) as f64).sqrt();
    s / (2.0 + s)
}

/// Left-hand side of the stationarity equation
/// `(k-2)/x + (q-2x) / ((k-1)((1-q)/2)^2 + x(q-x)) = 0`.
pub fn stationary_equation(k: usize, q: f64, x: f64) -> f64 {
    let beta = (1.0 - q) / 2.0;
    (k as f64 - 2.0) / x + (q - 2.0 * x) / ((k as f64 - 1.0) * beta * beta + x * (q - x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryDomain {
    pub k: usize,
    pub q: f64,
    pub q_k: f64,
    /// Positive root of the stationarity equation.
    pub root: f64,
    /// Right end of the domain of `F`: `min(q, root)`.
    pub x_max: f64,
}

pub fn stationary_domain(k: usize, q: f64) -> Result<StationaryDomain> {
    check_kq(k, q)?;
    let kf = k as f64;
    let disc = (kf - 1.0).powi(2) * q * q + kf * (kf - 2.0) * (kf - 1.0) * (1.0 - q).powi(2);
    let root = ((kf - 1.0) * q + disc.sqrt()) / (2.0 * kf);
    let residual = stationary_equation(k, q, root);
    if !(residual.abs() <= 1e-10) {
        return Err(EcError::Numerical {
            message: format!("stationary root for k={k}, q={q} misses its equation"),
            iterations: 0,
            residual,
        });
    }
    Ok(StationaryDomain {
        k,
        q,
        q_k: q_k(k),
        root,
        x_max: root.min(q),
    })
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^u)`.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// A point `x` of `(0, q)` stored by its log-odds `u = ln(x / (q - x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainPoint {
    pub q: f64,
    pub logit: f64,
}

impl DomainPoint {
    pub fn from_x(q: f64, x: f64) -> Self {
        DomainPoint {
            q,
            logit: (x / (q - x)).ln(),
        }
    }

    pub fn from_logit(q: f64, logit: f64) -> Self {
        DomainPoint { q, logit }
    }

    pub fn x(&self) -> f64 {
        self.q * sigmoid(self.logit)
    }

    pub fn q_minus_x(&self) -> f64 {
        self.q * sigmoid(-self.logit)
    }

    pub fn ln_x(&self) -> f64 {
        self.q.ln() - softplus(-self.logit)
    }

    pub fn ln_q_minus_x(&self) -> f64 {
        self.q.ln() - softplus(self.logit)
    }
}

/// Result of inverting `F` at `r`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GInverse {
    pub point: DomainPoint,
    pub x: f64,
    /// `F(point) - r`.
    pub residual: f64,
    pub iterations: usize,
}

impl StationaryDomain {
    /// Log-odds of `x_max`; infinite when `x_max = q`.
    pub fn logit_max(&self) -> f64 {
        if self.root < self.q {
            (self.root / (self.q - self.root)).ln()
        } else {
            f64::INFINITY
        }
    }

    fn beta(&self) -> f64 {
        (1.0 - self.q) / 2.0
    }

    /// Denominator of `F`, decreasing on the domain and zero at `root`.
    pub fn denominator_at(&self, p: &DomainPoint) -> f64 {
        let q = self.q;
        let kf = self.k as f64;
        let s = sigmoid(p.logit);
        let sc = sigmoid(-p.logit);
        let x = q * s;
        let xqx = q * q * s * sc;
        let q_minus_2x = q * (sc - s);
        let beta = self.beta();
        (kf - 2.0) / x + q_minus_2x / ((kf - 1.0) * beta * beta + xqx)
    }

    /// `F` at a domain point; `+inf` past the root of the denominator.
    pub fn f_at(&self, p: &DomainPoint) -> f64 {
        if p.logit <= 0.0 {
            return 0.0;
        }
        let den = self.denominator_at(p);
        if den <= 0.0 {
            f64::INFINITY
        } else {
            p.logit / den
        }
    }

    /// Bisection on the log-odds for `|F(x) - r| <= tol`.
    pub fn g_inverse(&self, r: f64, tol: f64, max_iter: usize) -> Result<GInverse> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(EcError::invalid(format!("G is defined for r > 0, got {r}")));
        }
        if !(tol > 0.0) {
            return Err(EcError::invalid(format!("tolerance must be positive, got {tol}")));
        }
        let q = self.q;
        let f = |u: f64| self.f_at(&DomainPoint::from_logit(q, u));
        let mut lo = 0.0;
        let mut hi = self.logit_max();
        if !hi.is_finite() {
            hi = 1.0;
            while f(hi) < r {
                hi *= 2.0;
                if hi > 1e7 {
                    return Err(EcError::Numerical {
                        message: format!("no upper bracket for G(r={r})"),
                        iterations: 0,
                        residual: f(hi) - r,
                    });
                }
            }
        }
        let mut best = (f64::INFINITY, 0.0);
        let mut iterations = 0;
        while iterations < max_iter {
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            let res = fm - r;
            if res.abs() < best.0.abs() {
                best = (res, mid);
            }
            if res.abs() <= tol {
                break;
            }
            if fm < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (residual, u) = best;
        if residual.abs() > tol {
            return Err(EcError::Numerical {
                message: format!("G(r={r}) for k={}, q={q} did not reach tolerance {tol:e}", self.k),
                iterations,
                residual,
            });
        }
        let point = DomainPoint::from_logit(q, u);
        Ok(GInverse {
            point,
            x: point.x(),
            residual,
            iterations,
        })
    }

    /// `t(alpha)` at a domain point, using the log-odds form for `ln(q - alpha)`.
    pub fn exponent_t_at(&self, r: f64, p: &DomainPoint) -> f64 {
        let kf = self.k as f64;
        let beta = self.beta();
        let x = p.x();
        let qx = p.q_minus_x();
        let ln_x = p.ln_x();
        let ln_qx = p.ln_q_minus_x();
        let ln_pk = (kf * (kf - 1.0)).ln()
            + (kf - 2.0) * ln_x
            + (beta * beta + x * qx / (kf - 1.0)).ln();
        r * ln_pk - x * ln_x - xlnx_with(qx, ln_qx) - (1.0 - self.q) * beta.ln()
    }

    /// Limit of `t(G(r))` as `r -> 0`: the entropy of `(q/2, q/2, beta, beta)`.
    pub fn exponent_at_zero(&self) -> f64 {
        let h = self.q / 2.0;
        -2.0 * h * h.ln() - (1.0 - self.q) * self.beta().ln()
    }

    /// `h(r) = t(G(r))`.
    pub fn exponent_at_optimum(&self, r: f64, tol: f64, max_iter: usize) -> Result<f64> {
        if r == 0.0 {
            return Ok(self.exponent_at_zero());
        }
        let g = self.g_inverse(r, tol, max_iter)?;
        Ok(self.exponent_t_at(r, &g.point))
    }
}

fn xlnx_with(x: f64, ln_x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * ln_x
    }
}

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `F_{k,q}(x) = ln(x/(q-x)) / [(k-2)/x + (q-2x)/((k-1)((1-q)/2)^2 + x(q-x))]`.
pub fn f_eval(k: usize, q: f64, x: f64) -> Result<f64> {
    let dom = stationary_domain(k, q)?;
    let lo = q / 2.0;
    if !(x > lo && x < dom.x_max) {
        return Err(EcError::Domain { x, lo, hi: dom.x_max });
    }
    let u = (x / (q - x)).ln();
    let beta = dom.beta();
    let den = (k as f64 - 2.0) / x + (q - 2.0 * x) / ((k as f64 - 1.0) * beta * beta + x * (q - x));
    Ok(u / den)
}

/// Inverse of [`f_eval`] with the default iteration cap.
pub fn g_inverse(k: usize, q: f64, r: f64, tol: f64) -> Result<GInverse> {
    stationary_domain(k, q)?.g_inverse(r, tol, DEFAULT_MAX_ITER)
}

/// `P_k(alpha, beta, gamma, delta) = k(k-1) alpha^{k-2} (beta gamma + alpha delta / (k-1))`.
pub fn p_k(k: usize, alpha: f64, beta: f64, gamma: f64, delta: f64) -> f64 {
    let kf = k as f64;
    kf * (kf - 1.0) * alpha.powi(k as i32 - 2) * (beta * gamma + alpha * delta / (kf - 1.0))
}

/// `t(alpha) = r ln P_k(alpha, b, b, q - alpha) - alpha ln alpha - (q-alpha) ln(q-alpha) - (1-q) ln b`
/// with `b = (1-q)/2` and `0 ln 0 = 0`.
pub fn exponent_t(k: usize, q: f64, r: f64, alpha: f64) -> Result<f64> {
    check_kq(k, q)?;
    if !(0.0..=q).contains(&alpha) {
        return Err(EcError::Domain { x: alpha, lo: 0.0, hi: q });
    }
    let beta = (1.0 - q) / 2.0;
    let pk = p_k(k, alpha, beta, beta, q - alpha);
    let rlnp = if r == 0.0 { 0.0 } else { r * pk.ln() };
    Ok(rlnp - xlnx(alpha) - xlnx(q - alpha) - (1.0 - q) * beta.ln())
}

/// Probability that a uniform k-subset is a clause satisfied by both
/// assignments of a pair with global profile `(a, b, c, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PStar {
    /// Exact value when every binomial fits in `u128`.
    pub exact: Option<Ratio<u128>>,
    /// Natural log, `-inf` when the probability is zero.
    pub ln: f64,
}

impl PStar {
    pub fn value(&self) -> f64 {
        self.ln.exp()
    }
}

/// `P* = [C(a,k-2) b c + C(a,k-1) d] / C(n,k)`.
pub fn pstar_exact(a: usize, b: usize, c: usize, d: usize, n: usize, k: usize) -> Result<PStar> {
    if a + b + c + d != n {
        return Err(EcError::invalid(format!(
            "profile ({a},{b},{c},{d}) does not sum to n={n}"
        )));
    }
    if k < 2 || k > n {
        return Err(EcError::invalid(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let (a64, k64) = (a as u64, k as u64);
    let exact = (|| {
        let num = binomial_u128(a64, k64 - 2)?
            .checked_mul(b as u128)?
            .checked_mul(c as u128)?
            .checked_add(binomial_u128(a64, k64 - 1)?.checked_mul(d as u128)?)?;
        let den = binomial_u128(n as u64, k64)?;
        Some((num, den))
    })();
    match exact {
        Some((num, den)) => {
            let ln = if num == 0 {
                f64::NEG_INFINITY
            } else {
                (num as f64).ln() - (den as f64).ln()
            };
            Ok(PStar {
                exact: Some(Ratio::new(num, den)),
                ln,
            })
        }
        None => {
            let ln_bc = if b == 0 || c == 0 {
                f64::NEG_INFINITY
            } else {
                ln_binomial(a64, k64 - 2) + (b as f64).ln() + (c as f64).ln()
            };
            let ln_d = if d == 0 {
                f64::NEG_INFINITY
            } else {
                ln_binomial(a64, k64 - 1) + (d as f64).ln()
            };
            let num = log_add_exp(ln_bc, ln_d);
            Ok(PStar {
                exact: None,
                ln: num - ln_binomial(n as u64, k64),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RUpConfig {
    pub r_max: f64,
    pub grid_points: usize,
    /// Target for `|t(G(r_up))|`.
    pub tol: f64,
    /// Target for `|F(G(r)) - r|` inside each evaluation.
    pub domain_tol: f64,
    pub max_iter: usize,
}

impl Default for RUpConfig {
    fn default() -> Self {
        RUpConfig {
            r_max: 20.0,
            grid_points: 2000,
            tol: DEFAULT_R_UP_TOL,
            domain_tol: DEFAULT_DOMAIN_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub r_value: f64,
    /// `t(G(r_value))`.
    pub residual: f64,
    pub bracket: (f64, f64),
    /// `t(G(.))` at the bracket ends: positive, then non-positive.
    pub bracket_values: (f64, f64),
    pub iterations: usize,
    /// `G(r_value)`.
    pub g_value: f64,
}

/// Upper bound `r_up(q, k)`: the last sign change of `h(r) = t(G(r))` on
/// `(0, r_max]`, located on a uniform grid and refined by bisection.
pub fn r_up_solve(k: usize, q: f64, cfg: &RUpConfig) -> Result<BoundResult> {
    if !(cfg.r_max > 0.0) || cfg.grid_points == 0 || !(cfg.tol > 0.0) {
        return Err(EcError::invalid("r_up scan needs r_max > 0, grid_points >= 1, tol > 0"));
    }
    let dom = stationary_domain(k, q)?;
    let h = |r: f64| dom.exponent_at_optimum(r, cfg.domain_tol, cfg.max_iter);

    let mut trace = Vec::with_capacity(cfg.grid_points + 1);
    trace.push((0.0, dom.exponent_at_zero()));
    for i in 1..=cfg.grid_points {
        let r = cfg.r_max * i as f64 / cfg.grid_points as f64;
        trace.push((r, h(r)?));
    }
    let last = trace.len() - 1;
    if trace[last].1 > 0.0 {
        return Err(EcError::NoSignChange { r_max: cfg.r_max, trace });
    }
    let Some(i) = (0..last).rev().find(|&i| trace[i].1 > 0.0) else {
        return Err(EcError::NoSignChange { r_max: cfg.r_max, trace });
    };
    let (mut lo, h_lo) = trace[i];
    let (mut hi, h_hi) = trace[i + 1];
    let bracket = (lo, hi);
    let bracket_values = (h_lo, h_hi);

    let mut iterations = 0;
    let (mut best_r, mut best_h) = if h_hi.abs() < h_lo.abs() { (hi, h_hi) } else { (lo, h_lo) };
    while best_h.abs() > cfg.tol && iterations < cfg.max_iter {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid)?;
        if hm.abs() < best_h.abs() {
            best_r = mid;
            best_h = hm;
        }
        if hm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if best_h.abs() > cfg.tol {
        return Err(EcError::Numerical {
            message: format!("r_up bisection for k={k}, q={q} stalled"),
            iterations,
            residual: best_h,
        });
    }
    let g = dom.g_inverse(best_r, cfg.domain_tol, cfg.max_iter)?;
    Ok(BoundResult {
        r_value: best_r,
        residual: best_h,
        bracket,
        bracket_values,
        iterations,
        g_value: g.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_k_for_three() {
        assert!((q_k(3) - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert!((q_k(3) - 0.414214).abs() < 1e-6);
    }

    #[test]
    fn domain_examples() {
        // 3x^2 - 0.4x - 0.32 = 0 has the root 0.4.
        let d = stationary_domain(3, 0.2).unwrap();
        assert!((d.root - 0.4).abs() < 1e-14);
        assert_eq!(d.x_max, 0.2);
        let d = stationary_domain(3, 0.6).unwrap();
        let expected = (1.2 + 2.4f64.sqrt()) / 6.0;
        assert!((d.root - expected).abs() < 1e-14);
        assert!((d.root - 0.458199).abs() < 1e-6);
        assert_eq!(d.x_max, d.root);
        assert!(d.root > d.q / 2.0);
    }

    #[test]
    fn domain_rejects_bad_parameters() {
        assert!(stationary_domain(2, 0.5).is_err());
        assert!(stationary_domain(3, 0.0).is_err());
        assert!(stationary_domain(3, 1.0).is_err());
        assert!(f_eval(3, 0.2, 0.1).is_err());
        assert!(f_eval(3, 0.2, 0.2).is_err());
        assert!(g_inverse(3, 0.2, 0.0, 1e-9).is_err());
        assert!(g_inverse(3, 0.2, 1.0, 0.0).is_err());
    }

    #[test]
    fn root_equals_q_at_q_k() {
        for k in 3..=6 {
            let d = stationary_domain(k, q_k(k)).unwrap();
            assert!((d.root - d.q).abs() <= 1e-9, "k={k}");
        }
    }

    #[test]
    fn f_example() {
        let direct = 3f64.ln() / (1.0 / 0.15 - 0.1 / 0.3275);
        let f = f_eval(3, 0.2, 0.15).unwrap();
        assert!((f - direct).abs() < 1e-14);
        assert!((f - 0.172702).abs() < 1e-6);
    }

    #[test]
    fn f_vanishes_at_left_end() {
        for &q in &[0.1, 0.5, 0.9] {
            let f = f_eval(3, q, q / 2.0 + 1e-9).unwrap();
            assert!(f > 0.0 && f < 1e-7, "q={q} f={f}");
        }
    }

    #[test]
    fn f_strictly_increasing_on_fine_grid() {
        for &(k, q) in &[(3, 0.2), (3, 0.6), (4, 0.3), (5, 0.9)] {
            let d = stationary_domain(k, q).unwrap();
            let lo = q / 2.0;
            let steps = 10_000;
            let mut prev = 0.0;
            for i in 1..steps {
                let x = lo + (d.x_max - lo) * i as f64 / steps as f64;
                let f = f_eval(k, q, x).unwrap();
                assert!(f > prev, "k={k} q={q} x={x}");
                prev = f;
            }
        }
    }

    #[test]
    fn g_examples() {
        let g = g_inverse(3, 0.2, 0.172702, 1e-12).unwrap();
        assert!((g.x - 0.15).abs() < 1e-5, "{}", g.x);
        for &x in &[0.11, 0.13, 0.15, 0.17, 0.19, 0.1999] {
            let r = f_eval(3, 0.2, x).unwrap();
            let g = g_inverse(3, 0.2, r, 1e-13).unwrap();
            assert!((g.x - x).abs() < 1e-9, "x={x} g={}", g.x);
        }
        let small = g_inverse(3, 0.2, 1e-9, 1e-15).unwrap();
        assert!((small.x - 0.1).abs() < 1e-8);
    }

    #[test]
    fn g_far_right_stays_representable() {
        // Here q - G(r) is far below the resolution of doubles near q.
        let d = stationary_domain(3, 0.05).unwrap();
        let g = d.g_inverse(5.0, 1e-12, 200).unwrap();
        assert!(g.point.logit > 50.0);
        assert!((d.f_at(&g.point) - 5.0).abs() <= 1e-12);
        assert!(g.point.q_minus_x() > 0.0);
    }

    #[test]
    fn p3_example() {
        let p = p_k(3, 0.15, 0.4, 0.4, 0.05);
        assert!((p - 0.147375).abs() < 1e-12);
        let k3 = 6.0 * 0.15 * (0.4 * 0.4 + 0.15 * 0.05 / 2.0);
        assert!((p - k3).abs() < 1e-15);
    }

    #[test]
    fn exponent_example() {
        let t = exponent_t(3, 0.2, 0.172702, 0.15).unwrap();
        let by_hand = 0.172702 * 0.147375f64.ln() - 0.15 * 0.15f64.ln() - 0.05 * 0.05f64.ln()
            - 0.8 * 0.4f64.ln();
        assert!((t - by_hand).abs() < 1e-12);
        assert!((t - 0.8367).abs() < 1e-4);
        let d = stationary_domain(3, 0.2).unwrap();
        let via_point = d.exponent_t_at(0.172702, &DomainPoint::from_x(0.2, 0.15));
        assert!((t - via_point).abs() < 1e-12);
        assert_eq!(exponent_t(3, 0.2, 1.0, 0.0).unwrap(), f64::NEG_INFINITY);
        assert!(exponent_t(3, 0.2, 1.0, 0.3).is_err());
    }

    #[test]
    fn exponent_is_stationary_at_g() {
        for &(k, q, r) in &[(3, 0.2, 0.172702), (3, 0.6, 0.4), (4, 0.35, 1.1), (5, 0.8, 0.05)] {
            let a = g_inverse(k, q, r, 1e-13).unwrap().x;
            let deriv = |h: f64| {
                (exponent_t(k, q, r, a + h).unwrap() - exponent_t(k, q, r, a - h).unwrap()) / (2.0 * h)
            };
            let h = 0.05 * (q - a).min(a - q / 2.0).min(1e-2);
            let (d1, d2) = (deriv(h), deriv(h / 2.0));
            // Central difference of a function with zero derivative: O(h^2),
            // so halving h quarters the error.
            assert!(d1.abs() < 1e-3, "k={k} q={q} d={d1}");
            assert!(d2.abs() < d1.abs() / 3.0 + 1e-9, "d1={d1} d2={d2}");
            // and a maximum
            let t0 = exponent_t(k, q, r, a).unwrap();
            assert!(t0 >= exponent_t(k, q, r, a + h).unwrap());
            assert!(t0 >= exponent_t(k, q, r, a - h).unwrap());
        }
    }

    #[test]
    fn pstar_examples() {
        let p = pstar_exact(3, 1, 1, 0, 5, 3).unwrap();
        assert_eq!(p.exact, Some(Ratio::new(3, 10)));
        assert!((p.value() - 0.3).abs() < 1e-15);
        let p = pstar_exact(3, 0, 0, 2, 5, 3).unwrap();
        assert_eq!(p.exact, Some(Ratio::new(6, 10)));
        let p = pstar_exact(0, 0, 3, 2, 5, 3).unwrap();
        assert_eq!(p.exact, Some(Ratio::new(0, 1)));
        assert_eq!(p.ln, f64::NEG_INFINITY);
        assert!(pstar_exact(1, 1, 1, 1, 5, 3).is_err());
    }

    #[test]
    fn pstar_log_space_matches_exact_when_both_exist() {
        // n = 200 forces the log-space path.
        let big = pstar_exact(120, 30, 30, 20, 200, 3).unwrap();
        assert!(big.exact.is_some());
        let num = 120.0 * 900.0 + 7140.0 * 20.0;
        let den = 1313400.0f64;
        assert!((big.ln - (num / den).ln()).abs() < 1e-12);
        let huge = pstar_exact(800, 50, 60, 90, 1000, 40).unwrap();
        assert!(huge.exact.is_none());
        let manual = log_add_exp(
            ln_binomial(800, 38) + 3000f64.ln(),
            ln_binomial(800, 39) + 90f64.ln(),
        ) - ln_binomial(1000, 40);
        assert!((huge.ln - manual).abs() < 1e-9);
    }

    #[test]
    fn pstar_approaches_p_k() {
        let n = 10_000usize;
        for &(k, alpha, beta, gamma) in &[(3, 0.3, 0.25, 0.2), (3, 0.5, 0.1, 0.15), (4, 0.4, 0.2, 0.2)] {
            let a = (alpha * n as f64).floor() as usize;
            let b = (beta * n as f64).floor() as usize;
            let c = (gamma * n as f64).floor() as usize;
            let d = n - a - b - c;
            let ps = pstar_exact(a, b, c, d, n, k).unwrap().value();
            let pk = p_k(k, a as f64 / n as f64, b as f64 / n as f64, c as f64 / n as f64, d as f64 / n as f64);
            assert!(((ps - pk) / pk).abs() <= 0.02, "k={k}: {ps} vs {pk}");
        }
    }

    #[test]
    fn r_up_residual_and_exclusion() {
        let cfg = RUpConfig::default();
        for &q in &[0.1, 0.3, 0.5, 0.8] {
            let b = r_up_solve(3, q, &cfg).unwrap();
            let g = g_inverse(3, q, b.r_value, 1e-12).unwrap();
            let t = exponent_t(3, q, b.r_value, g.x).unwrap();
            assert!(t.abs() <= 1e-8 + 1e-9, "q={q} t={t}");
            assert!(b.bracket.0 <= b.r_value && b.r_value <= b.bracket.1);
            assert!(b.bracket_values.0 > 0.0 && b.bracket_values.1 <= 0.0);
            let d = stationary_domain(3, q).unwrap();
            let doubled = d.exponent_at_optimum(2.0 * b.r_value, 1e-12, 200).unwrap();
            assert!(doubled < 0.0);
        }
    }

    #[test]
    fn r_up_reports_missing_sign_change() {
        let cfg = RUpConfig { r_max: 1e-3, grid_points: 10, ..RUpConfig::default() };
        match r_up_solve(3, 0.5, &cfg) {
            Err(EcError::NoSignChange { trace, .. }) => assert_eq!(trace.len(), 11),
            other => panic!("unexpected {other:?}"),
        }
    }
}

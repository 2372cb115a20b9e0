//! Numerical checks of the operational rules of the q-Laplace transform.
//!
//! Every check evaluates both sides of a rule independently (usually by
//! quadrature) and reports them with their relative error. Nothing here
//! asserts; callers pick the tolerance.

use std::cell::RefCell;

use super::catalog::CatalogFunction;
use super::numeric::{forward_numeric, integrate_support};
use crate::error::{Error, Result};
use crate::qmath::{q_exp, QParam};
use crate::quadrature::{integrate, integrate_semi_infinite, QuadratureConfig};

/// Two sides of an identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / |rhs|`, or the absolute difference when `rhs == 0`.
    pub rel_err: f64,
}

impl CheckReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let diff = (lhs - rhs).abs();
        let rel_err = if rhs == 0.0 { diff } else { diff / rhs.abs() };
        CheckReport { lhs, rhs, rel_err }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.rel_err.is_finite() && self.rel_err <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    /// `s → ∞`, against `f(0)`.
    Initial,
    /// `s → 0`, against `f(∞)`.
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    /// `(s, s F(s))` along the ladder.
    pub ladder: Vec<(f64, f64)>,
    /// Extrapolated limit against `f(0 or ∞) / (2-q)`.
    pub check: CheckReport,
    /// Whether the ladder errors shrink monotonically.
    pub monotone: bool,
}

pub const INITIAL_LADDER: [f64; 4] = [1e3, 1e4, 1e5, 1e6];
pub const FINAL_LADDER: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Keeps the first error raised inside a quadrature callback, which can only
/// return a number.
struct ErrorSlot(RefCell<Option<Error>>);

impl ErrorSlot {
    fn new() -> Self {
        ErrorSlot(RefCell::new(None))
    }

    fn value(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    /// Prefer the recorded inner error over the outer one it caused.
    fn finish(self, outer: Result<f64>) -> Result<f64> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => outer,
        }
    }
}

/// `lim s F(s) = f(0)/(2-q)` as `s → ∞`, or `f(∞)/(2-q)` as `s → 0`.
///
/// `s F(s)` is sampled on a four-point decade ladder and the last two
/// values are extrapolated linearly in `1/s` (or `s`).
pub fn limit_identity_check(
    q: QParam,
    f: &CatalogFunction,
    which: LimitKind,
    cfg: &QuadratureConfig,
) -> Result<LimitReport> {
    f.validate()?;
    let (ladder_s, target) = match which {
        LimitKind::Initial => (INITIAL_LADDER, f.eval(0.0)),
        LimitKind::Final => {
            let lim = f
                .limit_at_infinity()
                .ok_or_else(|| Error::Domain(format!("{f} has no finite limit as t grows")))?;
            (FINAL_LADDER, lim)
        }
    };
    let rhs = target / q.two_minus_q();
    let mut ladder = Vec::with_capacity(ladder_s.len());
    for &s in &ladder_s {
        ladder.push((s, s * forward_numeric(q, |t| f.eval(t), s, cfg)?));
    }
    let step = |s: f64| {
        if which == LimitKind::Initial {
            1.0 / s
        } else {
            s
        }
    };
    let (s1, v1) = ladder[ladder.len() - 2];
    let (s2, v2) = ladder[ladder.len() - 1];
    let (h1, h2) = (step(s1), step(s2));
    let extrapolated = (h1 * v2 - h2 * v1) / (h1 - h2);

    let slack = 1e-12 * rhs.abs().max(1.0);
    let errs: Vec<f64> = ladder.iter().map(|(_, v)| (v - rhs).abs()).collect();
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + slack);
    Ok(LimitReport {
        ladder,
        check: CheckReport::new(extrapolated, rhs),
        monotone,
    })
}

/// `L_q[f(a t)](s) = F_q(s/a) / a`.
pub fn scaling_check(
    q: QParam,
    f: &CatalogFunction,
    a: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "scale factor must be positive, got {a}"
        )));
    }
    let lhs = forward_numeric(q, |t| f.eval(a * t), s, cfg)?;
    let rhs = forward_numeric(q, |t| f.eval(t), s / a, cfg)? / a;
    Ok(CheckReport::new(lhs, rhs))
}

/// Pointwise kernel factorization
/// `exp_q(-(s-s0)t) = exp_q(-st) exp_q(s0 t / (1-(1-q)st))`.
pub fn shift_kernel_factor(q: QParam, s: f64, s0: f64, t: f64) -> Result<CheckReport> {
    let eps = q.eps();
    let denom = 1.0 - eps * s * t;
    let x = -s * t;
    let y = s0 * t / denom;
    let combined = -(s - s0) * t;
    let above = |z: f64| 1.0 + eps * z > 0.0;
    if !(denom > 0.0 && above(x) && above(y) && above(combined)) {
        return Err(Error::Domain(format!(
            "shift factorization needs every argument above the cutoff (s = {s}, s0 = {s0}, t = {t})"
        )));
    }
    let lhs = q_exp(q, combined);
    let rhs = q_exp(q, x) * q_exp(q, y);
    Ok(CheckReport::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranslationReport {
    /// `F(s) [exp_q(-s t0)]^{2-q}`
    pub lhs: f64,
    /// `L_q[f((t - t0)/(1-(1-q)s t0)) Θ(t - t0)](s)`
    pub rhs: f64,
    pub ratio: f64,
    /// `F(s) [exp_q(s t0)]^{2-q}`, the sign-flipped alternative.
    pub alt_lhs: f64,
    pub alt_ratio: f64,
}

/// Delay rule diagnostic. Reports how the delayed and rescaled input's
/// transform compares with two candidate closed forms; it does not decide
/// which is right.
pub fn translation_check(
    q: QParam,
    f: &CatalogFunction,
    t0: f64,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<TranslationReport> {
    if !(t0 > 0.0) {
        return Err(Error::Domain(format!("t0 must be positive, got {t0}")));
    }
    let c = 1.0 - q.eps() * s * t0;
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "t0 = {t0} lies beyond the kernel support at s = {s}"
        )));
    }
    let f_s = forward_numeric(q, |t| f.eval(t), s, cfg)?;
    let g = |t: f64| {
        let k = q_exp(q, -s * t);
        if k == 0.0 {
            0.0
        } else {
            f.eval((t - t0) / c) * k
        }
    };
    let rhs = integrate_support(q, s, t0, g, cfg)?;
    let power = q.two_minus_q();
    let lhs = f_s * q_exp(q, -s * t0).powf(power);
    let alt_lhs = f_s * q_exp(q, s * t0).powf(power);
    Ok(TranslationReport {
        lhs,
        rhs,
        ratio: rhs / lhs,
        alt_lhs,
        alt_ratio: rhs / alt_lhs,
    })
}

/// Transform of the `n`-th derivative:
/// `L_q[f^{(n)}](s) = -Σ_{l<n} P_{l-1} s^l f^{(n-1-l)}(0) + P_{n-1} s^n L_{q''}[f](a_n s)`
/// with `a_j = jq - (j-1)`, `P_l = a_0 ... a_l` (`P_{-1} = 1`) and
/// `q'' = a_{n+1}/a_n`.
pub fn derivative_rule_check(
    q: QParam,
    f: &CatalogFunction,
    n: u32,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "derivative order must be at least 1".into(),
        ));
    }
    let qv = q.value();
    let a: Vec<f64> = (0..=n + 1)
        .map(|j| j as f64 * qv - (j as f64 - 1.0))
        .collect();
    if let Some(j) = a.iter().position(|&aj| aj <= 0.0) {
        return Err(Error::Domain(format!(
            "a_{j} = {} is not positive; q = {qv} is too far from 1 for order {n}",
            a[j]
        )));
    }
    // fails early for variants without closed-form derivatives
    f.derivative(n, 0.0)?;

    let lhs = forward_numeric(q, |t| f.derivative(n, t).unwrap_or(f64::NAN), s, cfg)?;

    let mut boundary = 0.0;
    let mut p = 1.0;
    for l in 0..n {
        boundary -= p * s.powi(l as i32) * f.derivative(n - 1 - l, 0.0)?;
        p *= a[l as usize];
    }
    let shifted_q = QParam::new(a[n as usize + 1] / a[n as usize])?;
    let shifted = forward_numeric(shifted_q, |t| f.eval(t), a[n as usize] * s, cfg)?;
    let rhs = boundary + p * s.powi(n as i32) * shifted;
    Ok(CheckReport::new(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralRuleReport {
    /// `(s, RHS/LHS)` per grid point.
    pub ratios: Vec<(f64, f64)>,
    pub mean_ratio: f64,
    /// `(max - min) / |mean|` over the grid.
    pub spread: f64,
}

impl IntegralRuleReport {
    pub fn is_s_independent(&self, tol: f64) -> bool {
        self.spread.is_finite() && self.spread <= tol
    }
}

/// Compares `L_q[∫_0^t f](s)` with `((2-q)/s) L_{1/(2-q)}[f](s(2-q))` and
/// reports the ratio on each grid point.
pub fn integral_rule_diagnostic(
    q: QParam,
    f: &CatalogFunction,
    s_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<IntegralRuleReport> {
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("s grid is empty".into()));
    }
    f.antiderivative(0.0)?;
    let tq = q.two_minus_q();
    let dual = QParam::new(1.0 / tq)?;
    let mut ratios = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let lhs = forward_numeric(q, |t| f.antiderivative(t).unwrap_or(f64::NAN), s, cfg)?;
        let rhs = tq / s * forward_numeric(dual, |t| f.eval(t), s * tq, cfg)?;
        ratios.push((s, rhs / lhs));
    }
    let mean = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.1), hi.max(r.1))
        });
    Ok(IntegralRuleReport {
        ratios,
        mean_ratio: mean,
        spread: (hi - lo) / mean.abs(),
    })
}

/// Quadrature settings tight enough to survive a finite difference.
fn tight(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol: cfg.rel_tol.min(1e-13),
        abs_tol: f64::MIN_POSITIVE,
        max_depth: cfg.max_depth,
    }
}

/// Derivative-of-transform rule in integrated form:
/// `(1 - (1-q) s d/ds) G_n(s) = d/ds G_{n-1}(s)` with
/// `G_j = L_q[(-t)^j f]`. Derivatives are five-point central differences.
pub fn qderivative_of_transform_check(
    q: QParam,
    f: &CatalogFunction,
    n: u32,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    let inner = tight(cfg);
    let g =
        |j: u32, sigma: f64| forward_numeric(q, |t| (-t).powi(j as i32) * f.eval(t), sigma, &inner);
    let h = 2e-3 * s;
    let deriv = |j: u32| -> Result<f64> {
        let fm2 = g(j, s - 2.0 * h)?;
        let fm1 = g(j, s - h)?;
        let fp1 = g(j, s + h)?;
        let fp2 = g(j, s + 2.0 * h)?;
        Ok((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h))
    };
    let lhs = g(n, s)? - q.eps() * s * deriv(n)?;
    let rhs = deriv(n - 1)?;
    Ok(CheckReport::new(lhs, rhs))
}

/// Integral-of-transform rule:
/// `∫_s^∞ [F(σ) - (1-q) σ F'(σ)] dσ = L_q[f(t)/t](s)`.
///
/// `F'` is taken by quadrature of `-t f(t) exp_q(-σt)^q`, so the outer
/// integral is a nested one.
pub fn qintegral_of_transform_check(
    q: QParam,
    f: &CatalogFunction,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive, got {s}")));
    }
    if f.eval(0.0) != 0.0 {
        return Err(Error::Domain(format!(
            "{f}: f(t)/t diverges at t = 0, so its transform does not exist"
        )));
    }
    let inner = tight(cfg);
    let eps = q.eps();
    let qv = q.value();
    let slot = ErrorSlot::new();
    let integrand = |sigma: f64| {
        let big_f = slot.value(forward_numeric(q, |t| f.eval(t), sigma, &inner));
        let d = slot.value(integrate_support(
            q,
            sigma,
            0.0,
            |t| {
                let k = q_exp(q, -sigma * t);
                if k == 0.0 {
                    0.0
                } else {
                    -t * f.eval(t) * k.powf(qv)
                }
            },
            &inner,
        ));
        big_f - eps * sigma * d
    };
    let outer = integrate_semi_infinite(integrand, s, s, cfg).map(|r| r.value);
    let lhs = slot.finish(outer)?;
    let rhs = forward_numeric(q, |t| f.eval(t) / t, s, cfg)?;
    Ok(CheckReport::new(lhs, rhs))
}

/// Classical convolution theorem `L[f * g] = F G`, by nested quadrature.
pub fn convolution_check_classical(
    f: &CatalogFunction,
    g: &CatalogFunction,
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    let q = QParam::CLASSICAL;
    let inner = cfg.loosened(0.1);
    let slot = ErrorSlot::new();
    let conv = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        slot.value(integrate(|tau| f.eval(tau) * g.eval(t - tau), 0.0, t, &inner).map(|r| r.value))
    };
    let outer = forward_numeric(q, conv, s, cfg);
    let lhs = slot.finish(outer)?;
    let rhs =
        forward_numeric(q, |t| f.eval(t), s, cfg)? * forward_numeric(q, |t| g.eval(t), s, cfg)?;
    Ok(CheckReport::new(lhs, rhs))
}

/// `L_q[a1 f1 + a2 f2] = a1 F1 + a2 F2`.
pub fn linearity_check(
    q: QParam,
    (a1, f1): (f64, &CatalogFunction),
    (a2, f2): (f64, &CatalogFunction),
    s: f64,
    cfg: &QuadratureConfig,
) -> Result<CheckReport> {
    let lhs = forward_numeric(q, |t| a1 * f1.eval(t) + a2 * f2.eval(t), s, cfg)?;
    let rhs = a1 * forward_numeric(q, |t| f1.eval(t), s, cfg)?
        + a2 * forward_numeric(q, |t| f2.eval(t), s, cfg)?;
    Ok(CheckReport::new(lhs, rhs))
}

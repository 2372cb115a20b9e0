//! Inversion of the q-Laplace transform along the real axis.
//!
//! Two routes:
//!
//! * finite-`k` Post-Widder estimates, classical and q-deformed, built from
//!   exact `k`-th derivatives of `F`;
//! * the `k → ∞` limit taken term by term on a power series in `1/s`,
//!   which inverts `c_n s^{-(n+1)}` to `c_n Q_{n+1}(2-q) t^n / n!` exactly.

use crate::error::{Error, Result};
use crate::par;
use crate::qmath::{log_gamma, q_poly, xi_factor, xi_factor_real, LogValue, QParam};
use crate::transform::{
    catalog_transform, ln_rising_factorial, CatalogFunction, PowerSeriesTransform,
};

/// Source of exact `k`-th derivatives `F^{(k)}(s)`.
///
/// Closures `Fn(u32, f64) -> Result<LogValue>` implement it, which covers
/// closed-form test transforms.
pub trait DerivativeOracle {
    fn derivative(&self, k: u32, s: f64) -> Result<LogValue>;
}

impl DerivativeOracle for PowerSeriesTransform {
    fn derivative(&self, k: u32, s: f64) -> Result<LogValue> {
        Ok(PowerSeriesTransform::derivative(self, k, s))
    }
}

impl<F> DerivativeOracle for F
where
    F: Fn(u32, f64) -> Result<LogValue>,
{
    fn derivative(&self, k: u32, s: f64) -> Result<LogValue> {
        self(k, s)
    }
}

fn ln_factorial(k: u32) -> f64 {
    log_gamma(k as f64 + 1.0).expect("k + 1 is positive")
}

fn finite(v: LogValue, what: &str) -> Result<f64> {
    let x = v.to_f64();
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Overflow(format!(
            "{what} is not representable (ln|x| = {})",
            v.ln_abs
        )))
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "t must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

/// `(-1)^k / k! · s^{k+1} F^{(k)}(s)` at `s = k/t`.
pub fn classical_post_widder<D: DerivativeOracle + ?Sized>(
    oracle: &D,
    t: f64,
    k: u32,
) -> Result<f64> {
    check_t(t)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let s = k as f64 / t;
    let d = oracle.derivative(k, s)?;
    let est = d
        .negate_if(k % 2 == 1)
        .scale_ln((k as f64 + 1.0) * s.ln() - ln_factorial(k));
    finite(est, "Post-Widder estimate")
}

/// Which argument scaling the q-deformed estimator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMode {
    /// Each power `s^{-(n+1)}` gets its own `ξ_{n+1}`; converges to the
    /// series inverse for any power series.
    PerTerm,
    /// One `ξ_m` for the whole transform, evaluated at `s = kξ_m/t`. Exact in
    /// the limit only when `F ∝ s^{-m}`.
    Fixed(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidderConfig {
    pub k_schedule: Vec<u32>,
    pub xi_mode: XiMode,
    pub extrapolate: bool,
}

impl Default for WidderConfig {
    fn default() -> Self {
        WidderConfig {
            k_schedule: vec![4, 8, 16, 32, 64],
            xi_mode: XiMode::PerTerm,
            extrapolate: true,
        }
    }
}

impl WidderConfig {
    pub fn new(k_schedule: Vec<u32>, xi_mode: XiMode, extrapolate: bool) -> Result<Self> {
        let cfg = WidderConfig {
            k_schedule,
            xi_mode,
            extrapolate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_schedule.is_empty() || self.k_schedule[0] == 0 {
            return Err(Error::InvalidParameter(
                "k schedule must be non-empty and positive".into(),
            ));
        }
        if self.k_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "k schedule must be strictly increasing".into(),
            ));
        }
        if let XiMode::Fixed(m) = self.xi_mode {
            if m < 2 {
                return Err(Error::Domain(format!(
                    "xi_m is ill defined for m = {m}; need m >= 2"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidderEstimate {
    pub k: u32,
    pub estimate: f64,
    /// Richardson value in `1/k` through this and up to two earlier
    /// estimates; `None` for the first entry or when disabled.
    pub extrapolated: Option<f64>,
}

/// Neville extrapolation to `h = 0` with `h = 1/k`, using the last `levels+1`
/// points.
fn richardson(ks: &[u32], values: &[f64], levels: usize) -> f64 {
    let n = ks.len().min(levels + 1);
    let h: Vec<f64> = ks[ks.len() - n..].iter().map(|&k| 1.0 / k as f64).collect();
    let mut p: Vec<f64> = values[values.len() - n..].to_vec();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (h[i], h[i + level]);
            p[i] = (hj * p[i] - hi * p[i + 1]) / (hj - hi);
        }
    }
    p[0]
}

fn attach_extrapolation(cfg: &WidderConfig, raw: Vec<f64>) -> Vec<WidderEstimate> {
    let ks = &cfg.k_schedule;
    (0..raw.len())
        .map(|i| WidderEstimate {
            k: ks[i],
            estimate: raw[i],
            extrapolated: (cfg.extrapolate && i > 0).then(|| richardson(&ks[..=i], &raw[..=i], 2)),
        })
        .collect()
}

/// q-deformed Post-Widder estimates of `f(t)` for each `k` in the schedule.
///
/// `Fixed(m)`: `(-1)^k / k! · F^{(k)}(s) (2-q) s^{k+1}` at `s = k ξ_m / t`.
/// `PerTerm`: the same estimator applied to each power of the series with
/// its own `ξ`, which sums to
/// `Σ c_n Q_{n+1}(2-q) (n+k)! / (n! k! k^n) t^n`.
pub fn q_post_widder(
    q: QParam,
    f: &PowerSeriesTransform,
    t: f64,
    cfg: &WidderConfig,
) -> Result<Vec<WidderEstimate>> {
    check_t(t)?;
    cfg.validate()?;
    if f.coeffs().iter().all(|c| *c == 0.0) {
        return Err(Error::InvalidParameter(
            "transform has no non-zero coefficients".into(),
        ));
    }
    let raw: Vec<f64> = match cfg.xi_mode {
        XiMode::Fixed(m) => {
            let xi = xi_factor(q, m)?;
            let ln_tq = q.two_minus_q().ln();
            par::try_map(&cfg.k_schedule, |&k| {
                let s = k as f64 * xi / t;
                let d = f.derivative(k, s);
                let est = d
                    .negate_if(k % 2 == 1)
                    .scale_ln(ln_tq + (k as f64 + 1.0) * s.ln() - ln_factorial(k));
                finite(est, "q-Widder estimate")
            })?
        }
        XiMode::PerTerm => {
            let ln_t = t.ln();
            par::try_map(&cfg.k_schedule, |&k| {
                let kf = k as f64;
                let terms = f
                    .coeffs()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0.0)
                    .map(|(n, &c)| {
                        let nf = n as f64;
                        let weight = c * q_poly(q.two_minus_q(), n as u32 + 1);
                        // (n+k)!/(n! k!) = (k+1)_n / n!
                        let ln_mag = ln_rising_factorial(kf + 1.0, n as u32)
                            - ln_factorial(n as u32)
                            - nf * kf.ln()
                            + nf * ln_t;
                        LogValue::from_f64(weight).scale_ln(ln_mag)
                    });
                finite(LogValue::sum(terms), "q-Widder estimate")
            })?
        }
    };
    Ok(attach_extrapolation(cfg, raw))
}

/// q-Widder estimates for `F(s) = c s^{-p}` with a real power `p >= 2`,
/// evaluated at `s = k ξ_p / t`.
pub fn q_post_widder_power(
    q: QParam,
    c: f64,
    p: f64,
    t: f64,
    cfg: &WidderConfig,
) -> Result<Vec<WidderEstimate>> {
    check_t(t)?;
    cfg.validate()?;
    let xi = xi_factor_real(q, p)?;
    let ln_pref = q.two_minus_q().ln() - log_gamma(p)?;
    let raw = par::try_map(&cfg.k_schedule, |&k| {
        let s = k as f64 * xi / t;
        // (-1)^k F^{(k)}(s) = c Γ(p+k)/Γ(p) s^{-p-k}
        let ln_mag = ln_pref + log_gamma(p + k as f64)? - ln_factorial(k) + (1.0 - p) * s.ln();
        finite(LogValue::from_f64(c).scale_ln(ln_mag), "q-Widder estimate")
    })?;
    Ok(attach_extrapolation(cfg, raw))
}

/// `Γ(m+k) / (k^{m-1} Γ(k+1))`: ratio of the finite-`k` estimate to the exact
/// inverse for a single power `s^{-m}`. Tends to 1 like `1 + m(m-1)/(2k)`.
pub fn monomial_finite_k_factor(m: f64, k: u32) -> f64 {
    let kf = k as f64;
    let ln = log_gamma(m + kf).unwrap_or(f64::NAN) - (m - 1.0) * kf.ln() - ln_factorial(k);
    ln.exp()
}

/// `f(t) = Σ a_n t^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorSeries {
    coeffs: Vec<f64>,
    t_max: f64,
}

impl TaylorSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Overflow("non-finite Taylor coefficient".into()));
        }
        let t_max = truncation_radius(&coeffs);
        Ok(TaylorSeries { coeffs, t_max })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Largest `t` at which the highest stored term is below `1e-10` of the
    /// series' absolute sum, a proxy for where the truncation stays accurate.
    /// Infinite for a single term.
    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }
}

/// Largest `t` at which the last stored term is still below
/// `TRUNCATION_TOL` of the absolute series; infinite for single terms.
fn truncation_radius(coeffs: &[f64]) -> f64 {
    const TRUNCATION_TOL: f64 = 1e-10;
    let nz: Vec<(i32, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != 0.0)
        .map(|(n, a)| (n as i32, a.abs()))
        .collect();
    if nz.len() < 2 {
        return f64::INFINITY;
    }
    let (last, a_last) = *nz.last().unwrap();
    // share of the last term; increases with t
    let share = |ln_t: f64| {
        let ln_terms: Vec<f64> = nz.iter().map(|&(n, a)| a.ln() + n as f64 * ln_t).collect();
        let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = ln_terms.iter().map(|l| (l - max).exp()).sum();
        (a_last.ln() + last as f64 * ln_t - max).exp() / total
    };
    let (mut lo, mut hi) = (-30.0f64, 30.0f64);
    if share(hi) <= TRUNCATION_TOL {
        return f64::INFINITY;
    }
    if share(lo) > TRUNCATION_TOL {
        return 0.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if share(mid) <= TRUNCATION_TOL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.exp()
}

/// Exact term-wise inverse: `a_n = c_n Q_{n+1}(2-q) / n!`.
///
/// This is the `k → ∞` limit of the per-term Widder estimate and the exact
/// inverse of `t^n ↦ n! / (Q_{n+1}(2-q) s^{n+1})`. At `q = 1` it reduces to
/// the classical `a_n = c_n / n!`.
pub fn series_invert(q: QParam, f: &PowerSeriesTransform) -> Result<TaylorSeries> {
    let mut fact = 1.0;
    let mut coeffs = Vec::with_capacity(f.coeffs().len());
    for (n, &c) in f.coeffs().iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        coeffs.push(c * q_poly(q.two_minus_q(), n as u32 + 1) / fact);
    }
    TaylorSeries::new(coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub n: usize,
    pub recovered: f64,
    pub expected: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripReport {
    pub coefficients: Vec<CoefficientRow>,
    pub max_coeff_rel_err: f64,
    /// `(t, |series(t) - f(t)|)` on an 11-point grid over `[0, t_max]`.
    pub pointwise_err: Vec<(f64, f64)>,
    pub t_max: f64,
}

/// Forward closed form followed by [`series_invert`], compared with the
/// Taylor coefficients of `f` for `n = 0..=n_terms`.
pub fn roundtrip(q: QParam, f: &CatalogFunction, n_terms: usize) -> Result<RoundtripReport> {
    if n_terms < 4 {
        return Err(Error::InvalidParameter(format!(
            "roundtrip needs n_terms >= 4, got {n_terms}"
        )));
    }
    let transform = catalog_transform(q, f, n_terms + 1)?;
    let series = series_invert(q, &transform)?;
    let expected = f.taylor_coefficients(series.coeffs().len());
    let coefficients: Vec<CoefficientRow> = series
        .coeffs()
        .iter()
        .zip(&expected)
        .enumerate()
        .map(|(n, (&r, &e))| {
            let diff = (r - e).abs();
            let rel_err = if e == 0.0 { diff } else { diff / e.abs() };
            CoefficientRow {
                n,
                recovered: r,
                expected: e,
                rel_err,
            }
        })
        .collect();
    let max_coeff_rel_err = coefficients.iter().map(|c| c.rel_err).fold(0.0, f64::max);

    let t_max = series.t_max();
    let span = if t_max.is_finite() { t_max } else { 1.0 };
    let pointwise_err = (0..=10)
        .map(|i| {
            let t = span * i as f64 / 10.0;
            (t, (series.eval(t) - f.eval(t)).abs())
        })
        .collect();
    Ok(RoundtripReport {
        coefficients,
        max_coeff_rel_err,
        pointwise_err,
        t_max,
    })
}

/// The Widder weight `y^k (1 - (1-q) k y)^{1/(1-q) - k}` (`(y e^{-y})^k` at
/// `q = 1`), zero at and beyond its cutoff.
///
/// Its interior maximum sits at `y = 1` only while `k < 1/(1-q)`; past
/// that the second exponent turns negative and the weight grows toward the
/// cutoff.
pub fn widder_weight(q: QParam, k: u32, y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let kf = k as f64;
    if q.is_classical() {
        return (kf * (y.ln() - y)).exp();
    }
    let eps = q.eps();
    let base = 1.0 - eps * kf * y;
    if base <= 0.0 {
        return 0.0;
    }
    (kf * y.ln() + (1.0 / eps - kf) * base.ln()).exp()
}

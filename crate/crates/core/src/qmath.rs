//! Tsallis q-exponential and q-logarithm, the Q-polynomial family, Pochhammer
//! symbols, log-gamma, and the sign-tracked log-magnitude arithmetic used by
//! the inversion code.
//!
//! Throughout, `eps` denotes `1 - q`. For `q < 1` the q-exponential is cut
//! off to zero once its base `1 + eps * x` becomes non-positive; this is what
//! makes the type-I kernel compactly supported on `[0, 1 / (eps * s)]`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Deformation parameter `q` restricted to `(0, 1]`.
///
/// `q = 1` is the classical limit and is handled by exact classical branches
/// rather than numerically approaching it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct QParam(f64);

impl QParam {
    pub const CLASSICAL: QParam = QParam(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q <= 1.0 {
            Ok(QParam(q))
        } else {
            Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1], got {q}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - q`, always in `[0, 1)`.
    #[inline]
    pub fn eps(self) -> f64 {
        1.0 - self.0
    }

    #[inline]
    pub fn is_classical(self) -> bool {
        self.0 == 1.0
    }

    /// `2 - q`, the argument at which every closed form evaluates `Q_m`.
    #[inline]
    pub fn two_minus_q(self) -> f64 {
        2.0 - self.0
    }

    /// Right end of the type-I kernel support at Laplace variable `s`
    /// (`+inf` in the classical limit).
    #[inline]
    pub fn cutoff(self, s: f64) -> f64 {
        if self.is_classical() {
            f64::INFINITY
        } else {
            1.0 / (self.eps() * s)
        }
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for QParam {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        QParam::new(q)
    }
}

/// `exp_q(x) = [1 + (1-q) x]^{1/(1-q)}`, zero where the bracket is non-positive.
pub fn q_exp(q: QParam, x: f64) -> f64 {
    if q.is_classical() {
        return x.exp();
    }
    let eps = q.eps();
    let base = eps * x;
    // snap to the cutoff within rounding, so that t = 1/((1-q)s) maps to 0
    if base <= -1.0 + 2.0 * f64::EPSILON {
        return 0.0;
    }
    (base.ln_1p() / eps).exp()
}

/// `ln_q(x) = (x^{1-q} - 1) / (1 - q)`, inverse of [`q_exp`] on its positive branch.
pub fn q_log(q: QParam, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("q_log requires x > 0, got {x}")));
    }
    if q.is_classical() {
        return Ok(x.ln());
    }
    let eps = q.eps();
    Ok((eps * x.ln()).exp_m1() / eps)
}

/// The q-sum `x + y + (1-q) x y`, so that
/// `q_exp(x) * q_exp(y) == q_exp(q_product_arg(x, y))` above cutoff.
pub fn q_product_arg(q: QParam, x: f64, y: f64) -> f64 {
    x + y + q.eps() * x * y
}

/// `Q_m(x) = prod_{j=1}^{m} (1 - (1 - x) j)`, with `Q_0 = 1`.
///
/// Every closed form evaluates this at `x = 2 - q`, where each factor is
/// `1 + (1-q) j`.
pub fn q_poly(q_arg: f64, m: u32) -> f64 {
    let d = 1.0 - q_arg;
    (1..=m).map(|j| 1.0 - d * j as f64).product()
}

/// `Q_order(2 - q)` continued to real `order >= 0` through
/// `(1-q)^order Γ(1/(1-q) + order + 1) / Γ(1/(1-q) + 1)`.
///
/// Integer orders take the exact product. At `q = 1` the value is 1.
pub fn q_poly_real(q: QParam, order: f64) -> Result<f64> {
    if !(order >= 0.0) || !order.is_finite() {
        return Err(Error::Domain(format!(
            "Q-polynomial order must be a finite value >= 0, got {order}"
        )));
    }
    if order.fract() == 0.0 && order <= u32::MAX as f64 {
        return Ok(q_poly(q.two_minus_q(), order as u32));
    }
    if q.is_classical() {
        return Ok(1.0);
    }
    let eps = q.eps();
    let a = 1.0 / eps + 1.0;
    Ok((order * eps.ln() + log_gamma(a + order)? - log_gamma(a)?).exp())
}

/// The argument scaling `ξ_m = [(2-q) / Q_m(2-q)]^{1/(m-1)}`; undefined for `m < 2`.
pub fn xi_factor(q: QParam, m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "xi_m is ill defined for m = {m}; m must be at least 2"
        )));
    }
    xi_factor_real(q, m as f64)
}

/// [`xi_factor`] for a real power `m >= 2`, using [`q_poly_real`].
pub fn xi_factor_real(q: QParam, m: f64) -> Result<f64> {
    if !(m >= 2.0) {
        return Err(Error::Domain(format!(
            "xi_m is ill defined for m = {m}; m must be at least 2"
        )));
    }
    if q.is_classical() {
        return Ok(1.0);
    }
    let ratio = q.two_minus_q() / q_poly_real(q, m)?;
    Ok(ratio.powf(1.0 / (m - 1.0)))
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: f64, n: u32) -> f64 {
    (0..n).map(|i| x + i as f64).product()
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const ZETA_SERIES_TERMS: usize = 64;

/// `ζ(k) - 1` for `k = 2..ZETA_SERIES_TERMS`, computed once by Euler-Maclaurin.
fn zeta_minus_one() -> &'static [f64; ZETA_SERIES_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_SERIES_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_2 .. B_12
        const BERNOULLI: [f64; 6] = [
            1.0 / 6.0,
            -1.0 / 30.0,
            1.0 / 42.0,
            -1.0 / 30.0,
            5.0 / 66.0,
            -691.0 / 2730.0,
        ];
        const N: f64 = 12.0;
        let mut table = [0.0; ZETA_SERIES_TERMS];
        for (k, slot) in table.iter_mut().enumerate().skip(2) {
            let kf = k as f64;
            // sum from the small end is fine here, terms decrease fast
            let mut sum: f64 = (2..12).map(|n| (n as f64).powf(-kf)).sum();
            sum += N.powf(1.0 - kf) / (kf - 1.0) + 0.5 * N.powf(-kf);
            let mut rising = kf; // (k)_{2j-1}
            let mut factorial = 2.0; // (2j)!
            for (j, b) in BERNOULLI.iter().enumerate() {
                let j = j + 1;
                sum += b / factorial * rising * N.powf(-kf - 2.0 * j as f64 + 1.0);
                rising *= (kf + 2.0 * j as f64 - 1.0) * (kf + 2.0 * j as f64);
                factorial *= (2 * j + 1) as f64 * (2 * j + 2) as f64;
            }
            *slot = sum;
        }
        table
    })
}

/// `ln Γ(2 + z)` for `|z| <= 1` from its Taylor series about 2.
fn log_gamma_near_two(z: f64) -> f64 {
    let table = zeta_minus_one();
    let mut acc = 0.0;
    // (-1)^k (ζ(k) - 1) z^k / k
    let mut power = -z;
    for (k, zm1) in table.iter().enumerate().skip(2) {
        power *= -z;
        acc += zm1 / k as f64 * power;
    }
    (1.0 - EULER_GAMMA) * z + acc
}

fn log_gamma_stirling(x: f64) -> f64 {
    // B_{2j} / (2j (2j-1)) for j = 1..8
    const COEFFS: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv;
    for c in COEFFS {
        series += c * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// Natural log of the gamma function for `x > 0`.
///
/// Uses the Taylor series of `ln Γ` about 2 on `[1, 3]` (so the zeros at 1
/// and 2 keep full relative accuracy), upward recurrence below 1, downward
/// recurrence on `(3, 15)` and the Stirling series beyond.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x == 1.0 || x == 2.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let value = if x < 1.0 {
        // Γ(x) = Γ(x + 1) / x with x + 1 in (1, 2)
        log_gamma_near_two(x - 1.0) - x.ln()
    } else if x <= 3.0 {
        log_gamma_near_two(x - 2.0)
    } else if x < 15.0 {
        let mut y = x;
        let mut prod = 1.0;
        while y > 3.0 {
            y -= 1.0;
            prod *= y;
        }
        log_gamma_near_two(y - 2.0) + prod.ln()
    } else {
        log_gamma_stirling(x)
    };
    Ok(value)
}

/// A real number stored as `sign * exp(ln_abs)`.
///
/// Factorials and `s^{k+1}` factors at `k = 64` overflow `f64`; products of
/// such factors are carried in this form and only exponentiated at the end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln_abs: f64,
    /// One of `-1.0`, `0.0`, `1.0`.
    pub sign: f64,
}

impl std::ops::Mul for LogValue {
    type Output = LogValue;

    fn mul(self, other: LogValue) -> LogValue {
        LogValue::new(self.ln_abs + other.ln_abs, self.sign * other.sign)
    }
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn new(ln_abs: f64, sign: f64) -> Self {
        if sign == 0.0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                ln_abs,
                sign: sign.signum(),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue {
                ln_abs: x.abs().ln(),
                sign: x.signum(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    /// Multiply by `exp(ln_factor)` (a positive factor given by its log).
    pub fn scale_ln(self, ln_factor: f64) -> LogValue {
        LogValue::new(self.ln_abs + ln_factor, self.sign)
    }

    pub fn negate_if(self, flip: bool) -> LogValue {
        if flip {
            LogValue::new(self.ln_abs, -self.sign)
        } else {
            self
        }
    }

    /// Signed sum evaluated relative to the largest magnitude term.
    pub fn sum<I: IntoIterator<Item = LogValue>>(terms: I) -> LogValue {
        let terms: Vec<LogValue> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        let Some(max) = terms.iter().map(|t| t.ln_abs).reduce(f64::max) else {
            return Self::ZERO;
        };
        if max.is_infinite() {
            return LogValue::new(max, terms.iter().map(|t| t.sign).sum::<f64>().signum());
        }
        let acc: f64 = terms.iter().map(|t| t.sign * (t.ln_abs - max).exp()).sum();
        if acc == 0.0 {
            Self::ZERO
        } else {
            LogValue::new(max + acc.abs().ln(), acc.signum())
        }
    }
}

/// Type-I kernel `exp_q(-s t)`, the one every transform in this crate uses.
pub fn kernel_type_i(q: QParam, s: f64, t: f64) -> f64 {
    q_exp(q, -s * t)
}

/// Type-II kernel `[exp_q(-t)]^s`. Definition only.
pub fn kernel_type_ii(q: QParam, s: f64, t: f64) -> f64 {
    q_exp(q, -t).powf(s)
}

/// Type-III kernel `[exp_q(t)]^{-s}`. Definition only.
pub fn kernel_type_iii(q: QParam, s: f64, t: f64) -> f64 {
    q_exp(q, t).powf(-s)
}

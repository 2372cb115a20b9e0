//! Closed-form q-Laplace transforms of the elementary function catalog.
//!
//! Each transform has the shape
//! `F(s) = P * s^{-(1+δ)} * pFq(upper; lower; z0 / s^p)` with `p` equal to 1
//! or 2, and is stored as a [`PowerSeriesTransform`]: coefficients `c_n` of
//! `F(s) = Σ c_n s^{-(n+1)}`. With `ε = 1-q`, `ε' = 1-q'`, `a = 1/ε'` and
//! `b = 1/ε + 2 = (3-2q)/(1-q)` the parameters are
//!
//! | function            | P            | upper                         | lower                     | z0            |
//! |---------------------|--------------|-------------------------------|---------------------------|---------------|
//! | `exp(±αt)`          | `1/Q_1`      | `1`                           | `b`                       | `±α/ε`        |
//! | `exp_q'(±αt)`       | `1/Q_1`      | `1, -a`                       | `b`                       | `∓ε'α/ε`      |
//! | `exp(-αt²)`         | `1/Q_1`      | `1, 1/2`                      | `b/2, (b+1)/2`            | `-α/ε²`       |
//! | `exp_q'(-αt²)`      | `1/Q_1`      | `1, 1/2, -a`                  | `b/2, (b+1)/2`            | `ε'α/ε²`      |
//! | `cos`, `sin`        | `α^δ/Q_{δ+1}`| `1`                           | `(b+δ)/2, (b+1+δ)/2`      | `-α²/(4ε²)`   |
//! | `cosh`, `sinh`      | `α^δ/Q_{δ+1}`| `1`                           | `(b+δ)/2, (b+1+δ)/2`      | `α²/(4ε²)`    |
//! | `cos_q'`, `sin_q'`  | `α^δ/Q_{δ+1}`| `1, (δ-a)/2, (δ-a+1)/2`       | `(b+δ)/2, (b+1+δ)/2`      | `-(ε'α/ε)²`   |
//! | `cosh_q'`, `sinh_q'`| `α^δ/Q_{δ+1}`| `1, (δ-a)/2, (δ-a+1)/2`       | `(b+δ)/2, (b+1+δ)/2`      | `(ε'α/ε)²`    |
//!
//! where `Q_m = Q_m(2-q)`, `δ = 0` for the even member of a pair and 1 for
//! the odd one. The monomial `t^{m-1}` maps to the single term
//! `Γ(m) / (Q_m s^m)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::hypergeom::{scaled_terms, PFQParams};
use crate::qmath::{log_gamma, q_exp, q_poly, LogValue, QParam};

/// Relative size of the first dropped term at `s_min`.
pub const TRUNCATION_REL_TOL: f64 = 1e-12;

/// Largest `|z0| / s^p` accepted when choosing `s_min`.
pub const MAX_SERIES_ARGUMENT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Input functions with known closed-form transforms.
///
/// `Monomial { m }` is `t^{m-1}`. The `Q*` variants use the Tsallis
/// q-exponential with their own deformation `qprime`; the circular and
/// hyperbolic ones are built from `exp_q'(±i αt)` and `exp_q'(±αt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogFunction {
    Monomial {
        m: u32,
    },
    Exponential {
        sign: Sign,
        alpha: f64,
    },
    QExponential {
        qprime: QParam,
        sign: Sign,
        alpha: f64,
    },
    Gaussian {
        alpha: f64,
    },
    QGaussian {
        qprime: QParam,
        alpha: f64,
    },
    Cosine {
        alpha: f64,
    },
    Sine {
        alpha: f64,
    },
    QCosine {
        qprime: QParam,
        alpha: f64,
    },
    QSine {
        qprime: QParam,
        alpha: f64,
    },
    Cosh {
        alpha: f64,
    },
    Sinh {
        alpha: f64,
    },
    QCosh {
        qprime: QParam,
        alpha: f64,
    },
    QSinh {
        qprime: QParam,
        alpha: f64,
    },
}

/// How accurately the numeric and closed-form routes are expected to agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyClass {
    /// Monomials and the exponential family.
    Elementary,
    /// Gaussian, circular and hyperbolic families.
    Hypergeometric,
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use CatalogFunction::*;
        let sign = |s: &Sign| if *s == Sign::Plus { "+" } else { "-" };
        match self {
            Monomial { m } => write!(f, "monomial(m={m})"),
            Exponential { sign: s, alpha } => write!(f, "exp({}{alpha} t)", sign(s)),
            QExponential {
                qprime,
                sign: s,
                alpha,
            } => {
                write!(f, "exp_{qprime}({}{alpha} t)", sign(s))
            }
            Gaussian { alpha } => write!(f, "exp(-{alpha} t^2)"),
            QGaussian { qprime, alpha } => write!(f, "exp_{qprime}(-{alpha} t^2)"),
            Cosine { alpha } => write!(f, "cos({alpha} t)"),
            Sine { alpha } => write!(f, "sin({alpha} t)"),
            QCosine { qprime, alpha } => write!(f, "cos_{qprime}({alpha} t)"),
            QSine { qprime, alpha } => write!(f, "sin_{qprime}({alpha} t)"),
            Cosh { alpha } => write!(f, "cosh({alpha} t)"),
            Sinh { alpha } => write!(f, "sinh({alpha} t)"),
            QCosh { qprime, alpha } => write!(f, "cosh_{qprime}({alpha} t)"),
            QSinh { qprime, alpha } => write!(f, "sinh_{qprime}({alpha} t)"),
        }
    }
}

/// Taylor coefficients of `exp(x)` (no deformation) or `exp_q'(x)`.
fn exp_like_coefficients(qprime: Option<QParam>, n: usize) -> Vec<f64> {
    let eps = qprime.map_or(0.0, |q| q.eps());
    let mut out = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 0..n {
        out.push(c);
        c *= (1.0 - k as f64 * eps) / (k as f64 + 1.0);
    }
    out
}

impl CatalogFunction {
    /// Names accepted by the CLI, in catalog order.
    pub const NAMES: [&'static str; 13] = [
        "monomial",
        "exp",
        "qexp",
        "gaussian",
        "qgaussian",
        "cos",
        "sin",
        "qcos",
        "qsin",
        "cosh",
        "sinh",
        "qcosh",
        "qsinh",
    ];

    /// Build a variant from its CLI name. `m` is only read for monomials,
    /// `qprime` only for the deformed variants.
    pub fn from_name(name: &str, m: u32, alpha: f64, sign: Sign, qprime: f64) -> Result<Self> {
        use CatalogFunction::*;
        let qp = || QParam::new(qprime);
        let f = match name {
            "monomial" => Monomial { m },
            "exp" => Exponential { sign, alpha },
            "qexp" => QExponential {
                qprime: qp()?,
                sign,
                alpha,
            },
            "gaussian" => Gaussian { alpha },
            "qgaussian" => QGaussian {
                qprime: qp()?,
                alpha,
            },
            "cos" => Cosine { alpha },
            "sin" => Sine { alpha },
            "qcos" => QCosine {
                qprime: qp()?,
                alpha,
            },
            "qsin" => QSine {
                qprime: qp()?,
                alpha,
            },
            "cosh" => Cosh { alpha },
            "sinh" => Sinh { alpha },
            "qcosh" => QCosh {
                qprime: qp()?,
                alpha,
            },
            "qsinh" => QSinh {
                qprime: qp()?,
                alpha,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown catalog function '{other}' (expected one of {})",
                    Self::NAMES.join(", ")
                )))
            }
        };
        f.validate()?;
        Ok(f)
    }

    /// One instance of each of the thirteen variants.
    pub fn all_variants(qprime: QParam, alpha: f64) -> Vec<Self> {
        use CatalogFunction::*;
        vec![
            Monomial { m: 3 },
            Exponential {
                sign: Sign::Minus,
                alpha,
            },
            QExponential {
                qprime,
                sign: Sign::Minus,
                alpha,
            },
            Gaussian { alpha },
            QGaussian { qprime, alpha },
            Cosine { alpha },
            Sine { alpha },
            QCosine { qprime, alpha },
            QSine { qprime, alpha },
            Cosh { alpha },
            Sinh { alpha },
            QCosh { qprime, alpha },
            QSinh { qprime, alpha },
        ]
    }

    pub fn name(&self) -> &'static str {
        use CatalogFunction::*;
        match self {
            Monomial { .. } => "monomial",
            Exponential { .. } => "exp",
            QExponential { .. } => "qexp",
            Gaussian { .. } => "gaussian",
            QGaussian { .. } => "qgaussian",
            Cosine { .. } => "cos",
            Sine { .. } => "sin",
            QCosine { .. } => "qcos",
            QSine { .. } => "qsin",
            Cosh { .. } => "cosh",
            Sinh { .. } => "sinh",
            QCosh { .. } => "qcosh",
            QSinh { .. } => "qsinh",
        }
    }

    pub fn accuracy_class(&self) -> AccuracyClass {
        use CatalogFunction::*;
        match self {
            Monomial { .. } | Exponential { .. } | QExponential { .. } => AccuracyClass::Elementary,
            _ => AccuracyClass::Hypergeometric,
        }
    }

    fn alpha(&self) -> Option<f64> {
        use CatalogFunction::*;
        match *self {
            Monomial { .. } => None,
            Exponential { alpha, .. }
            | QExponential { alpha, .. }
            | Gaussian { alpha }
            | QGaussian { alpha, .. }
            | Cosine { alpha }
            | Sine { alpha }
            | QCosine { alpha, .. }
            | QSine { alpha, .. }
            | Cosh { alpha }
            | Sinh { alpha }
            | QCosh { alpha, .. }
            | QSinh { alpha, .. } => Some(alpha),
        }
    }

    fn qprime(&self) -> Option<QParam> {
        use CatalogFunction::*;
        match *self {
            QExponential { qprime, .. }
            | QGaussian { qprime, .. }
            | QCosine { qprime, .. }
            | QSine { qprime, .. }
            | QCosh { qprime, .. }
            | QSinh { qprime, .. } => Some(qprime),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CatalogFunction::Monomial { m } = self {
            if *m < 1 {
                return Err(Error::InvalidParameter("monomial needs m >= 1".into()));
            }
        }
        if let Some(alpha) = self.alpha() {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "alpha must be positive and finite, got {alpha}"
                )));
            }
        }
        if let Some(qp) = self.qprime() {
            if qp.is_classical() {
                return Err(Error::InvalidParameter(
                    "q' must lie strictly inside (0, 1)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Evaluate `f(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        use CatalogFunction::*;
        match *self {
            Monomial { m } => t.powi(m as i32 - 1),
            Exponential { sign, alpha } => (sign.factor() * alpha * t).exp(),
            QExponential {
                qprime,
                sign,
                alpha,
            } => q_exp(qprime, sign.factor() * alpha * t),
            Gaussian { alpha } => (-alpha * t * t).exp(),
            QGaussian { qprime, alpha } => q_exp(qprime, -alpha * t * t),
            Cosine { alpha } => (alpha * t).cos(),
            Sine { alpha } => (alpha * t).sin(),
            QCosine { qprime, alpha } => q_circular(qprime, alpha * t).0,
            QSine { qprime, alpha } => q_circular(qprime, alpha * t).1,
            Cosh { alpha } => (alpha * t).cosh(),
            Sinh { alpha } => (alpha * t).sinh(),
            QCosh { qprime, alpha } => 0.5 * (q_exp(qprime, alpha * t) + q_exp(qprime, -alpha * t)),
            QSinh { qprime, alpha } => 0.5 * (q_exp(qprime, alpha * t) - q_exp(qprime, -alpha * t)),
        }
    }

    /// Taylor coefficients `a_0..a_{n-1}` of `f` about `t = 0`, read off the
    /// defining power series (binomial series for the deformed exponential).
    pub fn taylor_coefficients(&self, n: usize) -> Vec<f64> {
        use CatalogFunction::*;
        let mut out = vec![0.0; n];
        match *self {
            Monomial { m } => {
                if let Some(slot) = out.get_mut(m as usize - 1) {
                    *slot = 1.0;
                }
            }
            Exponential { sign, alpha } | QExponential { sign, alpha, .. } => {
                let e = exp_like_coefficients(self.qprime(), n);
                let x = sign.factor() * alpha;
                for (k, slot) in out.iter_mut().enumerate() {
                    *slot = e[k] * x.powi(k as i32);
                }
            }
            Gaussian { alpha } | QGaussian { alpha, .. } => {
                let e = exp_like_coefficients(self.qprime(), n.div_ceil(2));
                for (j, ej) in e.iter().enumerate() {
                    out[2 * j] = ej * (-alpha).powi(j as i32);
                }
            }
            Cosine { alpha } | QCosine { alpha, .. } | Sine { alpha } | QSine { alpha, .. } => {
                // Re / Im of sum e_k (i α t)^k
                let odd = matches!(self, Sine { .. } | QSine { .. });
                let e = exp_like_coefficients(self.qprime(), n);
                for (k, slot) in out.iter_mut().enumerate() {
                    if (k % 2 == 1) == odd {
                        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        *slot = sign * e[k] * alpha.powi(k as i32);
                    }
                }
            }
            Cosh { alpha } | QCosh { alpha, .. } | Sinh { alpha } | QSinh { alpha, .. } => {
                let odd = matches!(self, Sinh { .. } | QSinh { .. });
                let e = exp_like_coefficients(self.qprime(), n);
                for (k, slot) in out.iter_mut().enumerate() {
                    if (k % 2 == 1) == odd {
                        *slot = e[k] * alpha.powi(k as i32);
                    }
                }
            }
        }
        out
    }

    /// `d^n f / dt^n` at `t`, for the variants whose derivatives have a
    /// closed form here.
    pub fn derivative(&self, n: u32, t: f64) -> Result<f64> {
        use CatalogFunction::*;
        if n == 0 {
            return Ok(self.eval(t));
        }
        let quarter_turn =
            |alpha: f64, phase: f64| alpha.powi(n as i32) * (alpha * t + phase).cos();
        let v = match *self {
            Monomial { m } => {
                let p = m as i32 - 1;
                if n as i32 > p {
                    0.0
                } else {
                    let falling: f64 = (0..n as i32).map(|j| (p - j) as f64).product();
                    falling * t.powi(p - n as i32)
                }
            }
            Exponential { sign, alpha } => {
                let x = sign.factor() * alpha;
                x.powi(n as i32) * (x * t).exp()
            }
            QExponential {
                qprime,
                sign,
                alpha,
            } => {
                let eps = qprime.eps();
                let x = sign.factor() * alpha;
                let base = 1.0 + eps * x * t;
                if base <= 0.0 {
                    0.0
                } else {
                    let falling: f64 = (0..n).map(|j| 1.0 - j as f64 * eps).product();
                    falling * x.powi(n as i32) * base.powf(1.0 / eps - n as f64)
                }
            }
            Gaussian { alpha } => {
                // d^n/dt^n e^{-α t²} = (-√α)^n H_n(√α t) e^{-α t²}
                let r = alpha.sqrt();
                let x = r * t;
                let (mut h_prev, mut h) = (1.0, 2.0 * x);
                for k in 1..n {
                    let next = 2.0 * x * h - 2.0 * k as f64 * h_prev;
                    h_prev = h;
                    h = next;
                }
                (-r).powi(n as i32) * h * (-alpha * t * t).exp()
            }
            Cosine { alpha } => quarter_turn(alpha, n as f64 * std::f64::consts::FRAC_PI_2),
            Sine { alpha } => quarter_turn(alpha, (n as f64 - 1.0) * std::f64::consts::FRAC_PI_2),
            Cosh { alpha } | Sinh { alpha } => {
                let even = n.is_multiple_of(2) == matches!(self, Cosh { .. });
                let v = if even {
                    (alpha * t).cosh()
                } else {
                    (alpha * t).sinh()
                };
                alpha.powi(n as i32) * v
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "closed-form derivatives of {self} are not available"
                )))
            }
        };
        Ok(v)
    }

    /// `∫_0^t f(τ) dτ` for the variants with an elementary antiderivative.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        use CatalogFunction::*;
        let v = match *self {
            Monomial { m } => t.powi(m as i32) / m as f64,
            Exponential { sign, alpha } => {
                let x = sign.factor() * alpha;
                (x * t).exp_m1() / x
            }
            Cosine { alpha } => (alpha * t).sin() / alpha,
            Sine { alpha } => (1.0 - (alpha * t).cos()) / alpha,
            Cosh { alpha } => (alpha * t).sinh() / alpha,
            Sinh { alpha } => ((alpha * t).cosh() - 1.0) / alpha,
            _ => {
                return Err(Error::Unsupported(format!(
                    "no closed-form antiderivative for {self}"
                )))
            }
        };
        Ok(v)
    }

    /// `lim_{t→∞} f(t)` when it exists.
    pub fn limit_at_infinity(&self) -> Option<f64> {
        use CatalogFunction::*;
        match *self {
            Monomial { m: 1 } => Some(1.0),
            Exponential {
                sign: Sign::Minus, ..
            }
            | QExponential {
                sign: Sign::Minus, ..
            }
            | Gaussian { .. }
            | QGaussian { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Hypergeometric form of the transform, `None` for monomials.
    fn hyper_form(&self, q: QParam) -> Result<Option<HyperForm>> {
        use CatalogFunction::*;
        let eps = q.eps();
        let q1 = q_poly(q.two_minus_q(), 1);
        let b = 1.0 / eps + 2.0;
        let even_odd = |delta: usize, alpha: f64| {
            let pref = alpha.powi(delta as i32) / q_poly(q.two_minus_q(), delta as u32 + 1);
            let d = delta as f64;
            (pref, vec![(b + d) / 2.0, (b + 1.0 + d) / 2.0])
        };
        let qcirc_upper = |qp: QParam, delta: usize| {
            let a = 1.0 / qp.eps();
            let d = delta as f64;
            vec![1.0, (d - a) / 2.0, (d - a + 1.0) / 2.0]
        };
        let (prefactor, delta, stride, upper, lower, z0) = match *self {
            Monomial { .. } => return Ok(None),
            Exponential { sign, alpha } => (
                1.0 / q1,
                0,
                1,
                vec![1.0],
                vec![b],
                sign.factor() * alpha / eps,
            ),
            QExponential {
                qprime,
                sign,
                alpha,
            } => {
                let ep = qprime.eps();
                (
                    1.0 / q1,
                    0,
                    1,
                    vec![1.0, -1.0 / ep],
                    vec![b],
                    -sign.factor() * ep * alpha / eps,
                )
            }
            Gaussian { alpha } => (
                1.0 / q1,
                0,
                2,
                vec![1.0, 0.5],
                vec![b / 2.0, (b + 1.0) / 2.0],
                -alpha / (eps * eps),
            ),
            QGaussian { qprime, alpha } => (
                1.0 / q1,
                0,
                2,
                vec![1.0, 0.5, -1.0 / qprime.eps()],
                vec![b / 2.0, (b + 1.0) / 2.0],
                qprime.eps() * alpha / (eps * eps),
            ),
            Cosine { alpha } | Sine { alpha } | Cosh { alpha } | Sinh { alpha } => {
                let delta = usize::from(matches!(self, Sine { .. } | Sinh { .. }));
                let sign = if matches!(self, Cosine { .. } | Sine { .. }) {
                    -1.0
                } else {
                    1.0
                };
                let (pref, lower) = even_odd(delta, alpha);
                (
                    pref,
                    delta,
                    2,
                    vec![1.0],
                    lower,
                    sign * alpha * alpha / (4.0 * eps * eps),
                )
            }
            QCosine { qprime, alpha }
            | QSine { qprime, alpha }
            | QCosh { qprime, alpha }
            | QSinh { qprime, alpha } => {
                let delta = usize::from(matches!(self, QSine { .. } | QSinh { .. }));
                let sign = if matches!(self, QCosine { .. } | QSine { .. }) {
                    -1.0
                } else {
                    1.0
                };
                let (pref, lower) = even_odd(delta, alpha);
                let r = qprime.eps() * alpha / eps;
                (
                    pref,
                    delta,
                    2,
                    qcirc_upper(qprime, delta),
                    lower,
                    sign * r * r,
                )
            }
        };
        Ok(Some(HyperForm {
            prefactor,
            delta,
            stride,
            params: PFQParams::new(upper, lower, z0)?,
        }))
    }
}

/// `(cos_q'(x), sin_q'(x))` = real and imaginary parts of `exp_q'(i x)`.
fn q_circular(qprime: QParam, x: f64) -> (f64, f64) {
    let eps = qprime.eps();
    let modulus = (0.5 / eps * (eps * x).mul_add(eps * x, 0.0).ln_1p()).exp();
    let phase = (eps * x).atan() / eps;
    (modulus * phase.cos(), modulus * phase.sin())
}

struct HyperForm {
    prefactor: f64,
    delta: usize,
    stride: usize,
    /// argument holds `z0`, the coefficient of `s^{-stride}`
    params: PFQParams,
}

/// `F(s) = Σ_n c_n s^{-(n+1)}` together with the smallest `s` at which the
/// stored truncation is trusted.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesTransform {
    coeffs: Vec<f64>,
    s_min: f64,
    q: QParam,
}

impl PowerSeriesTransform {
    pub fn new(q: QParam, coeffs: Vec<f64>, s_min: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter(
                "power series needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Overflow(
                "non-finite power-series coefficient".into(),
            ));
        }
        if !(s_min >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "s_min must be >= 0, got {s_min}"
            )));
        }
        Ok(PowerSeriesTransform { coeffs, s_min, q })
    }

    /// `coeff * s^{-power}`, valid for every `s > 0`.
    pub fn single_power(q: QParam, coeff: f64, power: u32) -> Result<Self> {
        if power == 0 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        let mut coeffs = vec![0.0; power as usize];
        coeffs[power as usize - 1] = coeff;
        PowerSeriesTransform::new(q, coeffs, 0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    /// `F(s)` by Horner's rule in `1/s`.
    pub fn eval(&self, s: f64) -> f64 {
        let w = 1.0 / s;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c) * w
    }

    /// `F^{(k)}(s) = (-1)^k Σ c_n (n+k)!/n! s^{-(n+k+1)}` in log-magnitude form.
    pub fn derivative(&self, k: u32, s: f64) -> LogValue {
        let ln_s = s.ln();
        let kf = k as f64;
        let terms = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(n, &c)| {
                let nf = n as f64;
                let ln_rise = ln_rising_factorial(nf + 1.0, k);
                LogValue::from_f64(c).scale_ln(ln_rise - (nf + kf + 1.0) * ln_s)
            });
        LogValue::sum(terms).negate_if(k % 2 == 1)
    }

    /// [`derivative`](Self::derivative) as a plain number.
    pub fn derivative_value(&self, k: u32, s: f64) -> f64 {
        self.derivative(k, s).to_f64()
    }
}

/// `ln[(x)(x+1)...(x+k-1)]` for `x > 0`; exact product for small `k`.
pub(crate) fn ln_rising_factorial(x: f64, k: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k <= 24 {
        let p: f64 = (0..k).map(|i| x + i as f64).product();
        if p.is_finite() {
            return p.ln();
        }
    }
    log_gamma(x + k as f64).unwrap_or(f64::NAN) - log_gamma(x).unwrap_or(f64::NAN)
}

/// Closed-form transform of `f` as a power series in `1/s` with `n_terms`
/// coefficients.
///
/// Requires `q < 1`, except for monomials whose closed form is also valid in
/// the classical limit.
pub fn catalog_transform(
    q: QParam,
    f: &CatalogFunction,
    n_terms: usize,
) -> Result<PowerSeriesTransform> {
    f.validate()?;
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    if let CatalogFunction::Monomial { m } = *f {
        let c = (log_gamma(m as f64)?).exp() / q_poly(q.two_minus_q(), m);
        let mut coeffs = vec![0.0; n_terms.max(m as usize)];
        coeffs[m as usize - 1] = c;
        return PowerSeriesTransform::new(q, coeffs, 0.0);
    }
    if q.is_classical() {
        return Err(Error::Domain(format!("the closed form of {f} needs q < 1")));
    }
    let form = f
        .hyper_form(q)?
        .expect("non-monomial variants have a hypergeometric form");
    let z0 = form.params.argument();
    let n_hyper = if n_terms > form.delta {
        (n_terms - 1 - form.delta) / form.stride
    } else {
        0
    };
    let h = scaled_terms(&form.params, z0, n_hyper);
    let mut coeffs = vec![0.0; n_terms.max(form.delta + 1)];
    for (n, hn) in h.iter().enumerate() {
        coeffs[form.delta + form.stride * n] = form.prefactor * hn;
    }

    let s_arg = (z0.abs() / MAX_SERIES_ARGUMENT).powf(1.0 / form.stride as f64);
    let exact = form
        .params
        .terminating_degree()
        .is_some_and(|d| d <= n_hyper);
    let s_min = if exact {
        s_arg
    } else {
        truncation_safe_s(&coeffs, s_arg)?
    };
    PowerSeriesTransform::new(q, coeffs, s_min)
}

/// Smallest `s >= start` (on a 1.25 ladder) at which the last stored term
/// is below `TRUNCATION_REL_TOL * |F(s)|`.
fn truncation_safe_s(coeffs: &[f64], start: f64) -> Result<f64> {
    let Some(last) = coeffs.iter().rposition(|c| *c != 0.0) else {
        return Ok(start);
    };
    let mut s = start.max(f64::MIN_POSITIVE);
    for _ in 0..400 {
        let w = 1.0 / s;
        let value = coeffs.iter().rev().fold(0.0, |acc, c| acc * w + c) * w;
        let tail = (coeffs[last] * w.powi(last as i32 + 1)).abs();
        if tail < TRUNCATION_REL_TOL * value.abs() {
            return Ok(s);
        }
        s *= 1.25;
    }
    Err(Error::NoConvergence {
        terms: coeffs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(v: f64) -> QParam {
        QParam::new(v).unwrap()
    }

    #[test]
    fn monomial_coefficients() {
        let f = CatalogFunction::Monomial { m: 2 };
        let t = catalog_transform(q(0.5), &f, 2).unwrap();
        assert_eq!(t.coeffs()[0], 0.0);
        assert_relative_eq!(t.coeffs()[1], 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(t.eval(1.0), 1.0 / 3.0, max_relative = 1e-15);
        // short n_terms still holds the monomial's coefficient
        let t = catalog_transform(q(0.5), &CatalogFunction::Monomial { m: 5 }, 1).unwrap();
        assert_eq!(t.coeffs().len(), 5);
    }

    #[test]
    fn exponential_coefficients_match_closed_form() {
        for &qv in &[0.3, 0.6, 0.9] {
            let qq = q(qv);
            let alpha = 0.7;
            let f = CatalogFunction::Exponential {
                sign: Sign::Plus,
                alpha,
            };
            let t = catalog_transform(qq, &f, 25).unwrap();
            let eps = qq.eps();
            let bb = (3.0 - 2.0 * qv) / eps;
            for (n, c) in t.coeffs().iter().enumerate() {
                let expected = (alpha / eps).powi(n as i32)
                    / crate::qmath::pochhammer(bb, n as u32)
                    / q_poly(qq.two_minus_q(), 1);
                assert_relative_eq!(*c, expected, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn cosine_near_classical_limit() {
        let eps = 1e-4;
        let qq = q(1.0 - eps);
        let alpha = 1.0;
        let t = catalog_transform(qq, &CatalogFunction::Cosine { alpha }, 40).unwrap();
        for i in 0..6 {
            let s = t.s_min() * (1.0 + i as f64);
            let classical = s / (s * s + alpha * alpha);
            assert_relative_eq!(t.eval(s), classical, max_relative = 10.0 * eps);
        }
    }

    #[test]
    fn classical_q_rejected_for_non_monomials() {
        let f = CatalogFunction::Sine { alpha: 1.0 };
        assert!(matches!(
            catalog_transform(q(1.0), &f, 10),
            Err(Error::Domain(_))
        ));
        let t = catalog_transform(q(1.0), &CatalogFunction::Monomial { m: 4 }, 4).unwrap();
        assert_relative_eq!(t.coeffs()[3], 6.0, max_relative = 1e-15);
    }

    #[test]
    fn s_min_bounds_the_series_argument_and_truncation() {
        for f in CatalogFunction::all_variants(q(0.7), 1.3) {
            let t = catalog_transform(q(0.6), &f, 40).unwrap();
            let s = t.s_min();
            let last = t.coeffs().iter().rposition(|c| *c != 0.0).unwrap();
            let tail = (t.coeffs()[last] * s.powi(-(last as i32 + 1))).abs();
            assert!(
                tail < TRUNCATION_REL_TOL * t.eval(s).abs() || last < 3,
                "{f}"
            );
        }
    }

    #[test]
    fn derivative_series_matches_term_formula() {
        let t = PowerSeriesTransform::new(q(0.5), vec![1.0, -2.0, 0.5], 0.0).unwrap();
        let s = 3.0_f64;
        for k in 0..6u32 {
            let mut expected = 0.0;
            for (n, c) in [1.0, -2.0, 0.5].iter().enumerate() {
                // d^k/ds^k s^{-(n+1)} = (-1)^k (n+1)(n+2)...(n+k) s^{-(n+k+1)}
                let rise: f64 = (1..=k).map(|j| (n as f64) + j as f64).product();
                expected += c * rise * s.powi(-((n as u32 + k + 1) as i32));
            }
            if k % 2 == 1 {
                expected = -expected;
            }
            assert_relative_eq!(t.derivative_value(k, s), expected, max_relative = 1e-13);
        }
        // large k stays finite in log form
        let d = t.derivative(300, 2.0);
        assert!(d.ln_abs.is_finite());
    }

    #[test]
    fn taylor_coefficients_direct() {
        let c = CatalogFunction::Cosine { alpha: 2.0 }.taylor_coefficients(5);
        assert_eq!(c, vec![1.0, 0.0, -2.0, 0.0, 16.0 / 24.0]);
        let s = CatalogFunction::Sine { alpha: 1.0 }.taylor_coefficients(4);
        assert_relative_eq!(s[3], -1.0 / 6.0);
        let qe = CatalogFunction::QExponential {
            qprime: q(0.5),
            sign: Sign::Minus,
            alpha: 1.0,
        };
        // (1 - t/2)^2 = 1 - t + t²/4
        assert_eq!(qe.taylor_coefficients(4), vec![1.0, -1.0, 0.25, 0.0]);
        let g = CatalogFunction::Gaussian { alpha: 3.0 }.taylor_coefficients(5);
        assert_eq!(g, vec![1.0, 0.0, -3.0, 0.0, 4.5]);
    }

    #[test]
    fn q_circular_matches_series_inside_radius() {
        let qp = q(0.8);
        let f = CatalogFunction::QCosine {
            qprime: qp,
            alpha: 1.0,
        };
        let g = CatalogFunction::QSine {
            qprime: qp,
            alpha: 1.0,
        };
        let cf = f.taylor_coefficients(120);
        let cg = g.taylor_coefficients(120);
        for &t in &[0.1f64, 0.9, 2.5] {
            let sf: f64 = cf
                .iter()
                .enumerate()
                .map(|(k, a)| a * t.powi(k as i32))
                .sum();
            let sg: f64 = cg
                .iter()
                .enumerate()
                .map(|(k, a)| a * t.powi(k as i32))
                .sum();
            assert_relative_eq!(f.eval(t), sf, max_relative = 1e-10);
            assert_relative_eq!(g.eval(t), sg, max_relative = 1e-10);
        }
    }

    #[test]
    fn derivatives_against_finite_differences() {
        let fs = [
            CatalogFunction::Monomial { m: 4 },
            CatalogFunction::Exponential {
                sign: Sign::Minus,
                alpha: 0.8,
            },
            CatalogFunction::QExponential {
                qprime: q(0.6),
                sign: Sign::Plus,
                alpha: 0.5,
            },
            CatalogFunction::Gaussian { alpha: 0.7 },
            CatalogFunction::Cosine { alpha: 1.3 },
            CatalogFunction::Sine { alpha: 1.3 },
            CatalogFunction::Cosh { alpha: 0.4 },
            CatalogFunction::Sinh { alpha: 0.4 },
        ];
        let h = 1e-4;
        for f in fs {
            for n in 1..4u32 {
                for &t in &[0.3, 1.1] {
                    let d = |x: f64| f.derivative(n - 1, x).unwrap();
                    let fd = (d(t - 2.0 * h) - 8.0 * d(t - h) + 8.0 * d(t + h) - d(t + 2.0 * h))
                        / (12.0 * h);
                    let exact = f.derivative(n, t).unwrap();
                    assert!(
                        (fd - exact).abs() < 1e-8 * exact.abs().max(1.0),
                        "{f} n={n} t={t}"
                    );
                }
            }
            // Taylor coefficients agree with derivatives at zero
            let a = f.taylor_coefficients(5);
            let mut fact = 1.0;
            for (j, aj) in a.iter().enumerate() {
                if j > 0 {
                    fact *= j as f64;
                }
                assert_relative_eq!(
                    f.derivative(j as u32, 0.0).unwrap(),
                    aj * fact,
                    epsilon = 1e-14,
                    max_relative = 1e-13
                );
            }
        }
        assert!(CatalogFunction::QCosine {
            qprime: q(0.5),
            alpha: 1.0
        }
        .derivative(1, 0.2)
        .is_err());
    }

    #[test]
    fn antiderivatives_differentiate_back() {
        let fs = [
            CatalogFunction::Monomial { m: 3 },
            CatalogFunction::Exponential {
                sign: Sign::Plus,
                alpha: 0.5,
            },
            CatalogFunction::Cosine { alpha: 2.0 },
            CatalogFunction::Sine { alpha: 2.0 },
            CatalogFunction::Cosh { alpha: 0.3 },
            CatalogFunction::Sinh { alpha: 0.3 },
        ];
        for f in fs {
            assert_eq!(f.antiderivative(0.0).unwrap(), 0.0);
            let h = 1e-5;
            let t = 0.8;
            let fd =
                (f.antiderivative(t + h).unwrap() - f.antiderivative(t - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(fd, f.eval(t), max_relative = 1e-8);
        }
        assert!(CatalogFunction::Gaussian { alpha: 1.0 }
            .antiderivative(1.0)
            .is_err());
    }

    #[test]
    fn names_round_trip() {
        for f in CatalogFunction::all_variants(q(0.5), 1.0) {
            let g = CatalogFunction::from_name(f.name(), 3, 1.0, Sign::Minus, 0.5).unwrap();
            assert_eq!(f.name(), g.name());
        }
        assert!(CatalogFunction::from_name("tan", 1, 1.0, Sign::Plus, 0.5).is_err());
        assert!(CatalogFunction::from_name("exp", 1, -1.0, Sign::Plus, 0.5).is_err());
        assert!(CatalogFunction::from_name("qexp", 1, 1.0, Sign::Plus, 1.0).is_err());
        assert!(CatalogFunction::from_name("monomial", 0, 1.0, Sign::Plus, 0.5).is_err());
    }
}

//! Generalized hypergeometric series `pFq(a_1..a_p; b_1..b_q; z)` by forward
//! term recurrence.
//!
//! No transformations or continuations are attempted: the catalog only needs
//! arguments of order `1/s` or `1/s^2`, so callers restrict `s` instead.

use crate::error::{Error, Result};

/// Parameters of a `pFq` series.
#[derive(Debug, Clone, PartialEq)]
pub struct PFQParams {
    upper: Vec<f64>,
    lower: Vec<f64>,
    argument: f64,
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

impl PFQParams {
    /// Validates the parameter lists.
    ///
    /// Lower parameters must avoid `0, -1, -2, ...`. A series with
    /// `p > q + 1` is rejected unless some upper parameter is a non-positive
    /// integer, in which case it is a polynomial.
    pub fn new(upper: Vec<f64>, lower: Vec<f64>, argument: f64) -> Result<Self> {
        if upper.iter().chain(&lower).any(|x| !x.is_finite()) || !argument.is_finite() {
            return Err(Error::InvalidParameter(
                "hypergeometric parameters must be finite".into(),
            ));
        }
        if let Some(b) = lower.iter().find(|&&b| is_nonpositive_integer(b)) {
            return Err(Error::InvalidParameter(format!(
                "lower parameter {b} is zero or a negative integer"
            )));
        }
        let params = PFQParams {
            upper,
            lower,
            argument,
        };
        if params.upper.len() > params.lower.len() + 1
            && argument != 0.0
            && params.terminating_degree().is_none()
        {
            return Err(Error::Divergent { argument });
        }
        Ok(params)
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn argument(&self) -> f64 {
        self.argument
    }

    pub fn with_argument(&self, argument: f64) -> Result<Self> {
        PFQParams::new(self.upper.clone(), self.lower.clone(), argument)
    }

    /// Degree of the polynomial when an upper parameter is `-N`.
    pub fn terminating_degree(&self) -> Option<usize> {
        self.upper
            .iter()
            .filter(|&&a| is_nonpositive_integer(a))
            .map(|&a| (-a) as usize)
            .min()
    }

    /// `t_{n+1} / t_n` without the argument factor.
    #[inline]
    fn term_ratio(&self, n: usize) -> f64 {
        let nf = n as f64;
        let num: f64 = self.upper.iter().map(|a| a + nf).product();
        let den: f64 = self.lower.iter().map(|b| b + nf).product();
        num / (den * (nf + 1.0))
    }
}

/// Stopping control for [`pfq`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || max_terms == 0 {
            return Err(Error::InvalidParameter(format!(
                "series control needs rel_tol > 0 and max_terms >= 1 (got {rel_tol}, {max_terms})"
            )));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }
}

/// Sum of the series at `params.argument()`.
///
/// Stops once three consecutive terms are below `rel_tol * |sum|`, which
/// keeps alternating series from stopping on an accidental small term.
pub fn pfq(params: &PFQParams, ctl: SeriesControl) -> Result<f64> {
    let z = params.argument;
    let terminating = params.terminating_degree();
    if params.upper.len() == params.lower.len() + 1 && z.abs() >= 1.0 && terminating.is_none() {
        return Err(Error::Divergent { argument: z });
    }
    if z == 0.0 {
        return Ok(1.0);
    }

    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small_run = 0;
    for n in 0..ctl.max_terms {
        term *= params.term_ratio(n) * z;
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Overflow(format!(
                "pFq partial sum overflowed after {} terms",
                n + 1
            )));
        }
        if term.abs() <= ctl.rel_tol * sum.abs() {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NoConvergence {
        terms: ctl.max_terms,
    })
}

/// Taylor coefficients `h_0..h_{n_max}` of the series in its argument, so
/// that `pFq(z) = sum h_n z^n`. The stored argument is ignored.
pub fn pfq_term_coefficients(params: &PFQParams, n_max: usize) -> Vec<f64> {
    scaled_terms(params, 1.0, n_max)
}

/// `h_n * z^n` for `n = 0..=n_max`, built with one running product so large
/// `z^n` and small `h_n` never meet separately.
pub(crate) fn scaled_terms(params: &PFQParams, z: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut term = 1.0;
    out.push(term);
    for n in 0..n_max {
        term *= params.term_ratio(n) * z;
        out.push(term);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(upper: &[f64], lower: &[f64], z: f64) -> PFQParams {
        PFQParams::new(upper.to_vec(), lower.to_vec(), z).unwrap()
    }

    #[test]
    fn exp_series() {
        let v = pfq(&p(&[], &[], 1.0), SeriesControl::default()).unwrap();
        assert_relative_eq!(v, std::f64::consts::E, max_relative = 1e-14);
    }

    #[test]
    fn kummer_at_one() {
        // oracle: sum 1/(n+1)! by direct factorial accumulation
        let mut oracle = 0.0;
        let mut fact = 1.0;
        for n in 0..30 {
            fact *= (n + 1) as f64;
            oracle += 1.0 / fact;
        }
        let v = pfq(&p(&[1.0], &[2.0], 1.0), SeriesControl::default()).unwrap();
        assert_relative_eq!(v, oracle, max_relative = 1e-13);
        assert_relative_eq!(v, std::f64::consts::E - 1.0, max_relative = 1e-13);
    }

    #[test]
    fn terminating_gauss() {
        // 1 - 2(0.5)/3 + 2*2/(12*2) * 0.25 = 1 - 1/3 + 1/24
        let v = pfq(&p(&[1.0, -2.0], &[3.0], 0.5), SeriesControl::default()).unwrap();
        assert_relative_eq!(v, 1.0 - 1.0 / 3.0 + 1.0 / 24.0, max_relative = 1e-15);
        // terminating series are fine beyond the unit disc
        let w = pfq(&p(&[1.0, -2.0], &[3.0], 3.0), SeriesControl::default()).unwrap();
        assert_relative_eq!(w, 1.0 - 2.0 + 4.0 / 24.0 * 9.0, max_relative = 1e-14);
    }

    #[test]
    fn coefficient_examples() {
        let c = pfq_term_coefficients(&p(&[], &[], 0.0), 3);
        assert_eq!(c.len(), 4);
        assert_relative_eq!(c[2], 0.5);
        assert_relative_eq!(c[3], 1.0 / 6.0);
        assert_eq!(
            pfq_term_coefficients(&p(&[-2.0], &[], 0.0), 3),
            vec![1.0, -2.0, 1.0, 0.0]
        );
        let c = pfq_term_coefficients(&p(&[], &[1.0], 0.0), 2);
        assert_eq!(c, vec![1.0, 1.0, 0.25]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PFQParams::new(vec![1.0], vec![0.0], 0.1).is_err());
        assert!(PFQParams::new(vec![1.0], vec![-3.0], 0.1).is_err());
        assert!(matches!(
            PFQParams::new(vec![1.0, 2.0, 3.0], vec![4.0], 0.1),
            Err(Error::Divergent { .. })
        ));
        // polynomial exception
        assert!(PFQParams::new(vec![1.0, 2.0, -3.0], vec![4.0], 0.1).is_ok());
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1e-10, 0).is_err());
    }

    #[test]
    fn gauss_class_outside_disc_is_divergent() {
        let params = p(&[1.0, 0.5], &[3.0], 1.0);
        assert!(matches!(
            pfq(&params, SeriesControl::default()),
            Err(Error::Divergent { .. })
        ));
        let params = p(&[1.0, 0.5], &[3.0], -1.5);
        assert!(pfq(&params, SeriesControl::default()).is_err());
    }

    #[test]
    fn reports_no_convergence() {
        let ctl = SeriesControl::new(1e-12, 5).unwrap();
        assert!(matches!(
            pfq(&p(&[], &[], 10.0), ctl),
            Err(Error::NoConvergence { terms: 5 })
        ));
    }

    proptest! {
        #[test]
        fn terminating_equals_direct_polynomial(
            degree in 0usize..12,
            b in 0.3f64..5.0,
            c in 0.2f64..4.0,
            z in -3.0f64..3.0,
        ) {
            let a = -(degree as f64);
            let params = p(&[a, b], &[c], z);
            let got = pfq(&params, SeriesControl::default()).unwrap();
            // direct summation with explicit Pochhammer products
            let mut direct = 0.0;
            let mut scale = 1.0f64;
            let mut fact = 1.0;
            for n in 0..=degree {
                if n > 0 { fact *= n as f64; }
                let num = crate::qmath::pochhammer(a, n as u32) * crate::qmath::pochhammer(b, n as u32);
                let term = num / (crate::qmath::pochhammer(c, n as u32) * fact) * z.powi(n as i32);
                direct += term;
                // cancellation between terms bounds the attainable accuracy
                scale = scale.max(term.abs());
            }
            prop_assert!((got - direct).abs() <= 1e-11 * scale, "{} vs {}", got, direct);
        }

        #[test]
        fn permutation_symmetry(
            a1 in 0.1f64..4.0, a2 in -2.5f64..4.0,
            b1 in 0.5f64..5.0, b2 in 0.5f64..5.0,
            z in -0.9f64..0.9,
        ) {
            let ctl = SeriesControl::default();
            let v1 = pfq(&p(&[a1, a2, 1.0], &[b1, b2], z), ctl).unwrap();
            let v2 = pfq(&p(&[1.0, a2, a1], &[b2, b1], z), ctl).unwrap();
            prop_assert!((v1 - v2).abs() <= 1e-11 * v1.abs().max(1.0));
        }

        #[test]
        fn sum_matches_coefficient_dot_product(
            a in 0.1f64..3.0, b in 0.5f64..4.0, c in 0.5f64..4.0, z in -0.6f64..0.6,
        ) {
            let params = p(&[a, 1.0], &[b, c], z);
            let sum = pfq(&params, SeriesControl::default()).unwrap();
            let coeffs = pfq_term_coefficients(&params, 80);
            let dot: f64 = coeffs.iter().enumerate().map(|(n, h)| h * z.powi(n as i32)).sum();
            prop_assert!((sum - dot).abs() <= 1e-11 * sum.abs().max(1.0));
        }
    }
}

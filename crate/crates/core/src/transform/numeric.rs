//! Forward transform by quadrature.

use crate::error::{Error, Result};
use crate::par;
use crate::qmath::{q_exp, QParam};
use crate::quadrature::{
    integrate, integrate_semi_infinite, integrate_toward_endpoint, QuadratureConfig,
};

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!(
            "s must be positive and finite, got {s}"
        )));
    }
    Ok(())
}

/// `∫_{lower}^{t*} g(t) dt` where `t*` is the kernel cutoff `1/((1-q)s)`
/// (infinity at `q = 1`). `g` already contains the kernel.
pub(crate) fn integrate_support<G>(
    q: QParam,
    s: f64,
    lower: f64,
    g: G,
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if q.is_classical() {
        return Ok(integrate_semi_infinite(g, lower, 1.0 / s, cfg)?.value);
    }
    let cutoff = q.cutoff(s);
    if lower >= cutoff {
        return Ok(0.0);
    }
    Ok(integrate_toward_endpoint(g, lower, cutoff, cfg)?.value)
}

/// `F_q(s) = ∫_0^∞ f(t) exp_q(-s t) dt`.
///
/// For `q < 1` the kernel vanishes past `1/((1-q)s)` and only that interval
/// is integrated; at `q = 1` the half line is mapped onto `[0, 1)`.
pub fn forward_numeric<F>(q: QParam, f: F, s: f64, cfg: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_s(s)?;
    integrate_support(q, s, 0.0, |t| weighted(q, &f, s, t), cfg)
}

#[inline]
fn weighted<F: Fn(f64) -> f64>(q: QParam, f: &F, s: f64, t: f64) -> f64 {
    let k = q_exp(q, -s * t);
    if k == 0.0 {
        0.0
    } else {
        f(t) * k
    }
}

/// Same integral taken over `[0, upper]` with no knowledge of the cutoff.
/// Used to confirm that nothing beyond the support contributes.
pub fn forward_numeric_to<F>(
    q: QParam,
    f: F,
    s: f64,
    upper: f64,
    cfg: &QuadratureConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_s(s)?;
    if !(upper > 0.0 && upper.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "upper limit must be positive, got {upper}"
        )));
    }
    Ok(integrate(|t| weighted(q, &f, s, t), 0.0, upper, cfg)?.value)
}

/// [`forward_numeric`] on every point of `s_grid`, in grid order.
pub fn transform_grid<F>(
    q: QParam,
    f: F,
    s_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    par::try_map(s_grid, |&s| forward_numeric(q, &f, s, cfg))
}

/// `I_q(s, s') = ∫ exp_q(-s t) [exp_q(-s' t)]^{2q-3} dt`, expected to equal
/// `1 / ((2-q)(s - s'))` for `0 < s' < s`.
pub fn kernel_pair_integral(
    q: QParam,
    s: f64,
    s_prime: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(s_prime > 0.0 && s_prime < s && s.is_finite()) {
        return Err(Error::Domain(format!(
            "kernel pair integral needs 0 < s' < s, got s = {s}, s' = {s_prime}"
        )));
    }
    let power = 2.0 * q.value() - 3.0;
    let g = |t: f64| {
        let k = q_exp(q, -s * t);
        if k == 0.0 {
            0.0
        } else {
            k * q_exp(q, -s_prime * t).powf(power)
        }
    };
    integrate_support(q, s, 0.0, g, cfg)
}

//! q-deformed partition functions of the classical ideal gas and of
//! independent harmonic oscillators, and their densities of states.
//!
//! Both partition functions are pure powers, `Z_q(β) = C_q β^{-m}`, with
//! `m = DN/2` for the gas and `m = DN` for the oscillators. Since
//! `Z_q = L_q[g](β)`, inverting the single power gives
//! `g(E) = C_q Q_m(2-q) E^{m-1} / Γ(m)`, and the q-dependence of `C_q`
//! cancels.

use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::inverse::{q_post_widder, q_post_widder_power, WidderConfig, WidderEstimate, XiMode};
use crate::qmath::{log_gamma, q_exp, q_poly_real, QParam};
use crate::quadrature::{integrate_semi_infinite, integrate_toward_endpoint, QuadratureConfig};
use crate::transform::PowerSeriesTransform;

/// Largest `D·N` accepted; beyond it the prefactors leave `f64` range.
pub const MAX_DEGREES_OF_FREEDOM: u32 = 200;

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

fn check_dof(d: u32, n: u32) -> Result<u32> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter("D and N must be positive".into()));
    }
    let dof = d.saturating_mul(n);
    if dof > MAX_DEGREES_OF_FREEDOM {
        return Err(Error::Overflow(format!(
            "D*N = {dof} exceeds the supported maximum of {MAX_DEGREES_OF_FREEDOM}"
        )));
    }
    Ok(dof)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGasModel {
    pub d: u32,
    pub n: u32,
    pub volume: f64,
    pub mass: f64,
    pub h: f64,
}

impl IdealGasModel {
    pub fn new(d: u32, n: u32, volume: f64, mass: f64, h: f64) -> Result<Self> {
        let model = IdealGasModel {
            d,
            n,
            volume,
            mass,
            h,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_dof(self.d, self.n)?;
        positive("volume", self.volume)?;
        positive("mass", self.mass)?;
        positive("h", self.h)
    }

    /// `ln[V^N (2πm)^{DN/2} / (h^{DN} N!)]`, the classical prefactor.
    fn ln_classical_prefactor(&self) -> f64 {
        let dof = (self.d * self.n) as f64;
        self.n as f64 * self.volume.ln() + 0.5 * dof * (2.0 * PI * self.mass).ln()
            - dof * self.h.ln()
            - log_gamma(self.n as f64 + 1.0).expect("N + 1 > 0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorModel {
    pub d: u32,
    pub n: u32,
    pub omega: f64,
    pub hbar: f64,
}

impl OscillatorModel {
    pub fn new(d: u32, n: u32, omega: f64, hbar: f64) -> Result<Self> {
        let model = OscillatorModel { d, n, omega, hbar };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        check_dof(self.d, self.n)?;
        positive("omega", self.omega)?;
        positive("hbar", self.hbar)
    }

    fn ln_classical_prefactor(&self) -> f64 {
        -((self.d * self.n) as f64) * (self.hbar * self.omega).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThermoModel {
    IdealGas(IdealGasModel),
    Oscillator(OscillatorModel),
}

impl ThermoModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            ThermoModel::IdealGas(m) => m.validate(),
            ThermoModel::Oscillator(m) => m.validate(),
        }
    }

    /// The power `m` in `Z ∝ β^{-m}`.
    pub fn power(&self) -> f64 {
        match self {
            ThermoModel::IdealGas(m) => 0.5 * (m.d * m.n) as f64,
            ThermoModel::Oscillator(m) => (m.d * m.n) as f64,
        }
    }

    fn ln_classical_prefactor(&self) -> f64 {
        match self {
            ThermoModel::IdealGas(m) => m.ln_classical_prefactor(),
            ThermoModel::Oscillator(m) => m.ln_classical_prefactor(),
        }
    }

    /// `Z_q(β)`. The deformation enters only through `1/Q_m(2-q)`, i.e.
    /// `Γ(1/(1-q)+1) / ((1-q)^m Γ(1/(1-q)+m+1))`; at `q = 1` this is the
    /// classical partition function.
    pub fn partition(&self, q: QParam, beta: f64) -> Result<f64> {
        self.validate()?;
        positive("beta", beta)?;
        let m = self.power();
        let ln_z = self.ln_classical_prefactor() - q_poly_real(q, m)?.ln() - m * beta.ln();
        let z = ln_z.exp();
        if !z.is_finite() || z == 0.0 {
            return Err(Error::Overflow(format!(
                "partition function out of range (ln Z = {ln_z})"
            )));
        }
        Ok(z)
    }
}

pub fn ideal_gas_partition(q: QParam, model: &IdealGasModel, beta: f64) -> Result<f64> {
    ThermoModel::IdealGas(*model).partition(q, beta)
}

pub fn oscillator_partition(q: QParam, model: &OscillatorModel, beta: f64) -> Result<f64> {
    ThermoModel::Oscillator(*model).partition(q, beta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DosSample {
    pub energy: f64,
    pub analytic: f64,
    /// q-Widder estimates along the k schedule.
    pub estimates: Vec<WidderEstimate>,
}

impl DosSample {
    /// Estimate at the largest `k`.
    pub fn numeric(&self) -> f64 {
        self.estimates.last().map_or(f64::NAN, |e| e.estimate)
    }
}

/// `g(E) = prefactor · E^exponent`, with numeric inversions on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOfStates {
    pub prefactor: f64,
    pub exponent: f64,
    pub samples: Vec<DosSample>,
}

impl DensityOfStates {
    pub fn eval(&self, energy: f64) -> f64 {
        self.prefactor * energy.powf(self.exponent)
    }

    /// `(E, g)` pairs from the largest `k` of the schedule.
    pub fn numeric_pairs(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.energy, s.numeric()))
            .collect()
    }
}

/// Density of states by inverting `Z_q(β) = C_q β^{-m}`.
///
/// The analytic limit is read from the q-deformed coefficient, so any
/// mismatch in the q-dependent factors would surface as a q-dependent
/// result. Numeric estimates use `ξ_m` with `m` fixed by the model; an
/// explicit `XiMode::Fixed` in `cfg` must agree with it.
pub fn density_of_states(
    q: QParam,
    model: &ThermoModel,
    e_grid: &[f64],
    cfg: &WidderConfig,
) -> Result<DensityOfStates> {
    cfg.validate()?;
    let m = model.power();
    if m < 2.0 {
        return Err(Error::Domain(format!(
            "transform power m = {m} < 2: xi_m is ill defined for m = 1 and below"
        )));
    }
    if let XiMode::Fixed(fixed) = cfg.xi_mode {
        if fixed as f64 != m {
            return Err(Error::InvalidParameter(format!(
                "xi mode Fixed({fixed}) does not match the transform power {m}"
            )));
        }
    }
    for &e in e_grid {
        positive("energy", e)?;
    }
    let coeff = model.partition(q, 1.0)?;
    let prefactor = (coeff.ln() + q_poly_real(q, m)?.ln() - log_gamma(m)?).exp();

    let integer_power = (m.fract() == 0.0).then_some(m as u32);
    let fixed_cfg = WidderConfig {
        xi_mode: XiMode::Fixed(integer_power.unwrap_or(2)),
        ..cfg.clone()
    };
    let series = match integer_power {
        Some(p) => Some(PowerSeriesTransform::single_power(q, coeff, p)?),
        None => None,
    };
    let mut samples = Vec::with_capacity(e_grid.len());
    for &energy in e_grid {
        let estimates = match &series {
            Some(f) => q_post_widder(q, f, energy, &fixed_cfg)?,
            None => q_post_widder_power(q, coeff, m, energy, &fixed_cfg)?,
        };
        samples.push(DosSample {
            energy,
            analytic: prefactor * energy.powf(m - 1.0),
            estimates,
        });
    }
    Ok(DensityOfStates {
        prefactor,
        exponent: m - 1.0,
        samples,
    })
}

/// Which momenta the brute-force phase-space integral covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumDomain {
    /// Every momentum component over the whole real line.
    FullSpace,
    /// Every momentum component over `[0, ∞)`.
    PositiveOrthant,
}

/// `Z_q(β)` for a gas with `D·N = 2` by direct quadrature over the two
/// momentum coordinates:
/// `V^N / (h² N!) ∫∫ exp_q(-β (p1² + p2²) / 2m) dp1 dp2`.
pub fn ideal_gas_partition_brute_force(
    q: QParam,
    model: &IdealGasModel,
    beta: f64,
    domain: MomentumDomain,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    model.validate()?;
    positive("beta", beta)?;
    if model.d * model.n != 2 {
        return Err(Error::Unsupported(format!(
            "brute-force integration is implemented for D*N = 2, got {}",
            model.d * model.n
        )));
    }
    let c = beta / (2.0 * model.mass);
    let inner_cfg = cfg.loosened(0.1);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let keep = |r: Result<f64>| match r {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let outer = if q.is_classical() {
        let scale = (1.0 / c).sqrt();
        let inner = |p1: f64| {
            let r = integrate_semi_infinite(
                |p2| (-c * (p1 * p1 + p2 * p2)).exp(),
                0.0,
                scale,
                &inner_cfg,
            );
            keep(r.map(|i| i.value))
        };
        integrate_semi_infinite(inner, 0.0, scale, cfg)
    } else {
        let p_max = (1.0 / (q.eps() * c)).sqrt();
        let inner = |p1: f64| {
            let reach = (p_max * p_max - p1 * p1).max(0.0).sqrt();
            let r = integrate_toward_endpoint(
                |p2| q_exp(q, -c * (p1 * p1 + p2 * p2)),
                0.0,
                reach,
                &inner_cfg,
            );
            keep(r.map(|i| i.value))
        };
        integrate_toward_endpoint(inner, 0.0, p_max, cfg)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let quadrant = outer?.value;
    let quadrants = match domain {
        MomentumDomain::FullSpace => 4.0,
        MomentumDomain::PositiveOrthant => 1.0,
    };
    let ln_pref =
        model.n as f64 * model.volume.ln() - 2.0 * model.h.ln() - log_gamma(model.n as f64 + 1.0)?;
    Ok(ln_pref.exp() * quadrants * quadrant)
}

//! Globally adaptive Gauss-Kronrod (10/21 point) quadrature.
//!
//! Panels are kept in a max-heap keyed by their error estimate and the worst
//! one is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |I|)`. Integrands that are only finitely smooth
//! at one end (the q-kernel near its cutoff, or a mapped infinite range) get
//! an initial partition that shrinks geometrically toward that end.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any one initial panel.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 60,
        }
    }
}

impl QuadratureConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) || max_depth == 0 {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances and depth must be positive (rel {rel_tol}, abs {abs_tol}, depth {max_depth})"
            )));
        }
        Ok(QuadratureConfig {
            rel_tol,
            abs_tol,
            max_depth,
        })
    }

    /// Same configuration with both tolerances multiplied by `factor`.
    pub fn loosened(self, factor: f64) -> Self {
        QuadratureConfig {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..self
        }
    }
}

/// Value and error estimate of a converged integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

// Kronrod abscissae, descending; odd indices are the Gauss-10 nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_596,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const GEOMETRIC_PANELS: u32 = 24;
const MAX_EVALUATIONS: usize = 4_000_000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn sample<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = sample(f, center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = sample(f, center - dx)? + sample(f, center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Panel {
        a,
        b,
        value,
        error,
        depth,
    })
}

/// Integrate `f` over the union of consecutive panels given by `breaks`
/// (strictly increasing, at least two points).
pub fn integrate_partitioned<F>(f: F, breaks: &[f64], cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if breaks.len() < 2 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::with_capacity(256);
    let mut evaluations = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if !(w[1] > w[0]) {
            continue;
        }
        let p = gauss_kronrod(&f, w[0], w[1], 0)?;
        evaluations += 21;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }

    loop {
        let target = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        // Rounding floor: once a panel cannot be split in floating point, or
        // its error is already at the noise level of its value, stop here.
        let mid = 0.5 * (worst.a + worst.b);
        let noise = 50.0 * f64::EPSILON * worst.value.abs();
        if worst.depth >= cfg.max_depth
            || mid <= worst.a
            || mid >= worst.b
            || evaluations >= MAX_EVALUATIONS
        {
            if worst.error <= noise.max(target) {
                heap.push(worst);
                break;
            }
            return Err(Error::ToleranceNotMet {
                value: total,
                error: total_err,
            });
        }
        let left = gauss_kronrod(&f, worst.a, mid, worst.depth + 1)?;
        let right = gauss_kronrod(&f, mid, worst.b, worst.depth + 1)?;
        evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);

        // Re-sum now and then so cancellation in the running totals never
        // drives the loop.
        if evaluations.is_multiple_of(42 * 64) {
            total = heap.iter().map(|p| p.value).sum();
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }

    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
    let floor: f64 = heap
        .iter()
        .map(|p| 50.0 * f64::EPSILON * p.value.abs())
        .sum();
    if error > target.max(floor) {
        return Err(Error::ToleranceNotMet { value, error });
    }
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }
    integrate_partitioned(f, &two_sided_breaks(a, b), cfg)
}

/// Break points `a, a + w/2, a + 3w/4, ..., b` that crowd toward `b`.
pub fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    let width = b - a;
    let mut breaks = Vec::with_capacity(GEOMETRIC_PANELS as usize + 2);
    breaks.push(a);
    let mut gap = width;
    for _ in 0..GEOMETRIC_PANELS {
        gap *= 0.5;
        let x = b - gap;
        if x <= *breaks.last().unwrap() {
            break;
        }
        breaks.push(x);
    }
    breaks.push(b);
    breaks
}

/// Break points crowding geometrically toward both `a` and `b`.
///
/// A first Kronrod sample on a long panel can miss a feature that lives in
/// a tiny fraction of it (an `e^{-t}` on `[0, 10^6]`), and then reports a
/// confident zero. Fine panels at both ends rule that out.
pub fn two_sided_breaks(a: f64, b: f64) -> Vec<f64> {
    let mid = 0.5 * (a + b);
    let half = mid - a;
    let mut breaks = vec![a];
    let mut gap = half * 0.5f64.powi(GEOMETRIC_PANELS as i32);
    while a + gap < mid {
        if a + gap > *breaks.last().unwrap() {
            breaks.push(a + gap);
        }
        gap *= 2.0;
    }
    breaks.extend(geometric_breaks(mid, b));
    breaks.dedup();
    breaks
}

/// Integrate over `[a, b]` when `f` loses smoothness at `b`.
pub fn integrate_toward_endpoint<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(b > a) {
        return integrate(f, a, b, cfg);
    }
    integrate_partitioned(f, &two_sided_breaks(a, b), cfg)
}

/// Integrate over `[a, inf)` through `t = a + scale * u / (1 - u)`.
///
/// `scale` should be the length over which `f` decays (e.g. `1/s` for a
/// Laplace kernel).
pub fn integrate_semi_infinite<F>(
    f: F,
    a: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "semi-infinite scale must be positive, got {scale}"
        )));
    }
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let t = a + scale * u / one_minus;
        let y = f(t);
        if y == 0.0 {
            0.0
        } else {
            y * scale / (one_minus * one_minus)
        }
    };
    integrate_partitioned(mapped, &two_sided_breaks(0.0, 1.0), cfg)
}

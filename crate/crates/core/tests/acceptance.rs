//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL` line on
//! stderr (bypassing the test harness capture) and then asserts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::time::Instant;

use qlaplace::inverse::{
    classical_post_widder, q_post_widder, roundtrip, series_invert, WidderConfig, XiMode,
};
use qlaplace::qmath::{pochhammer, LogValue};
use qlaplace::quadrature::QuadratureConfig;
use qlaplace::statmech::{
    density_of_states, ideal_gas_partition, ideal_gas_partition_brute_force, IdealGasModel,
    MomentumDomain, OscillatorModel, ThermoModel,
};
use qlaplace::transform::identities::{
    derivative_rule_check, integral_rule_diagnostic, limit_identity_check,
    qderivative_of_transform_check, qintegral_of_transform_check, scaling_check,
    shift_kernel_factor, translation_check, LimitKind,
};
use qlaplace::transform::{
    catalog_transform, forward_numeric, kernel_pair_integral, AccuracyClass, CatalogFunction, Sign,
};
use qlaplace::QParam;

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn report(id: u32, title: &str, failures: &[String], detail: &str) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    let mut line = format!("{status} criterion {id}: {title} ({detail})\n");
    for f in failures.iter().take(10) {
        line.push_str(&format!("    {f}\n"));
    }
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "criterion {id} failed: {failures:#?}");
}

/// `∏_{j=1}^{m} (1 + j ε)` written out directly.
fn q_product(eps: f64, m: u32) -> f64 {
    (1..=m).map(|j| 1.0 + j as f64 * eps).product()
}

/// Binomial coefficients of `(1 + ε x)^{1/ε}`: `e_j = ∏_{i<j} (1 - i ε) / j!`.
fn binomial_exp(eps: Option<f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut e = 1.0;
    for j in 0..n {
        out.push(e);
        let shrink = eps.map_or(1.0, |eps| 1.0 - j as f64 * eps);
        e *= shrink / (j as f64 + 1.0);
    }
    out
}

fn taylor_oracle(f: &CatalogFunction, n: usize) -> Vec<f64> {
    use CatalogFunction::*;
    let mut out = vec![0.0; n];
    let pattern = |eps: Option<f64>,
                   alpha: f64,
                   even: bool,
                   odd: bool,
                   alternate: bool,
                   out: &mut Vec<f64>| {
        let e = binomial_exp(eps, n);
        for k in 0..n {
            if (k % 2 == 0 && even) || (k % 2 == 1 && odd) {
                let sign = if alternate && (k / 2) % 2 == 1 {
                    -1.0
                } else {
                    1.0
                };
                out[k] = sign * e[k] * alpha.powi(k as i32);
            }
        }
    };
    match *f {
        Monomial { m } => out[m as usize - 1] = 1.0,
        Exponential { sign, alpha } => {
            pattern(None, sign.factor() * alpha, true, true, false, &mut out)
        }
        QExponential {
            qprime,
            sign,
            alpha,
        } => pattern(
            Some(qprime.eps()),
            sign.factor() * alpha,
            true,
            true,
            false,
            &mut out,
        ),
        Gaussian { .. } | QGaussian { .. } => {
            let (eps, alpha) = match *f {
                Gaussian { alpha } => (None, alpha),
                QGaussian { qprime, alpha } => (Some(qprime.eps()), alpha),
                _ => unreachable!(),
            };
            let e = binomial_exp(eps, n.div_ceil(2));
            for (j, ej) in e.iter().enumerate() {
                out[2 * j] = ej * (-alpha).powi(j as i32);
            }
        }
        Cosine { alpha } => pattern(None, alpha, true, false, true, &mut out),
        Sine { alpha } => pattern(None, alpha, false, true, true, &mut out),
        QCosine { qprime, alpha } => {
            pattern(Some(qprime.eps()), alpha, true, false, true, &mut out)
        }
        QSine { qprime, alpha } => pattern(Some(qprime.eps()), alpha, false, true, true, &mut out),
        Cosh { alpha } => pattern(None, alpha, true, false, false, &mut out),
        Sinh { alpha } => pattern(None, alpha, false, true, false, &mut out),
        QCosh { qprime, alpha } => pattern(Some(qprime.eps()), alpha, true, false, false, &mut out),
        QSinh { qprime, alpha } => pattern(Some(qprime.eps()), alpha, false, true, false, &mut out),
    }
    out
}

#[test]
fn criterion_1_forward_transform_oracle() {
    let start = Instant::now();
    let cfg = QuadratureConfig::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for qv in [0.3, 0.6, 0.9] {
        for f in CatalogFunction::all_variants(q(0.7), 0.8) {
            let closed = catalog_transform(q(qv), &f, 60).unwrap();
            let tol = match f.accuracy_class() {
                AccuracyClass::Elementary => 1e-8,
                AccuracyClass::Hypergeometric => 1e-6,
            };
            let s0 = closed.s_min().max(0.5);
            for i in 0..8 {
                let s = s0 * 1.5f64.powi(i);
                let numeric = forward_numeric(q(qv), |t| f.eval(t), s, &cfg).unwrap();
                let err = rel(numeric, closed.eval(s));
                checked += 1;
                if !(err <= tol) {
                    failures.push(format!("{f} q={qv} s={s}: rel err {err:.3e} > {tol:.0e}"));
                }
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        failures.push(format!("runtime {elapsed:.1} s exceeds 60 s"));
    }
    report(
        1,
        "forward transform matches closed form",
        &failures,
        &format!("{checked} points, {elapsed:.2} s"),
    );
}

#[test]
fn criterion_2_kernel_pair_identity() {
    let cfg = QuadratureConfig::default();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let pairs = [(1.0, 0.5), (2.0, 0.1), (3.0, 2.5), (5.0, 1.0)];
    for qv in [0.2, 0.4, 0.6, 0.8, 0.95] {
        for &(s, sp) in &pairs {
            let v = kernel_pair_integral(q(qv), s, sp, &cfg).unwrap();
            let expected = 1.0 / ((2.0 - qv) * (s - sp));
            let err = rel(v, expected);
            worst = worst.max(err);
            if !(err <= 1e-8) {
                failures.push(format!("q={qv} s={s} s'={sp}: rel err {err:.3e}"));
            }
        }
    }
    report(
        2,
        "kernel pair integral",
        &failures,
        &format!("20 triples, worst {worst:.2e}"),
    );
}

#[test]
fn criterion_3_series_roundtrip() {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for qv in [0.3, 0.6, 0.9] {
        for f in CatalogFunction::all_variants(q(0.7), 0.6) {
            let transform = catalog_transform(q(qv), &f, 21).unwrap();
            let series = series_invert(q(qv), &transform).unwrap();
            let oracle = taylor_oracle(&f, 21);
            for (n, (&got, &want)) in series.coeffs().iter().zip(&oracle).enumerate() {
                let err = rel(got, want);
                worst = worst.max(err);
                if !(err <= 1e-10) {
                    failures.push(format!("{f} q={qv} n={n}: got {got:e}, want {want:e}"));
                }
            }
            let r = roundtrip(q(qv), &f, 20).unwrap();
            if !(r.max_coeff_rel_err <= 1e-10) {
                failures.push(format!(
                    "{f} q={qv}: roundtrip report {:.3e}",
                    r.max_coeff_rel_err
                ));
            }
        }
    }
    report(
        3,
        "series roundtrip for n <= 20",
        &failures,
        &format!("worst {worst:.2e}"),
    );
}

#[test]
fn criterion_4_classical_post_widder() {
    // F(s) = 1/(s+1): F^{(k)}(s) = (-1)^k k! (s+1)^{-k-1}
    let oracle = |k: u32, s: f64| -> qlaplace::Result<LogValue> {
        let ln_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(LogValue::new(
            ln_fact - (k as f64 + 1.0) * (s + 1.0).ln(),
            sign,
        ))
    };
    let exact = (-1.0f64).exp();
    let err = |k: u32| rel(classical_post_widder(&oracle, 1.0, k).unwrap(), exact);
    let mut failures = Vec::new();
    let e64 = err(64);
    if !(e64 <= 1e-2) {
        failures.push(format!("k=64 rel err {e64:.3e}"));
    }
    let ratios: Vec<f64> = [16, 32].iter().map(|&k| err(2 * k) / err(k)).collect();
    for (k, r) in [16, 32].iter().zip(&ratios) {
        if !(0.4..=0.6).contains(r) {
            failures.push(format!("err({})/err({k}) = {r:.4}", 2 * k));
        }
    }
    report(
        4,
        "classical Post-Widder rate",
        &failures,
        &format!(
            "k=64 err {e64:.3e}, ratios {:.4} {:.4}",
            ratios[0], ratios[1]
        ),
    );
}

#[test]
fn criterion_5_monomial_widder_law() {
    let ks = vec![2, 4, 8, 16, 32, 64, 128, 256, 512];
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for qv in [0.5, 0.9] {
        for m in 2..=6u32 {
            let f = CatalogFunction::Monomial { m };
            let transform = catalog_transform(q(qv), &f, m as usize).unwrap();
            let cfg = WidderConfig::new(ks.clone(), XiMode::Fixed(m), false).unwrap();
            for t in [0.5f64, 1.0, 2.7] {
                let exact = t.powi(m as i32 - 1);
                let est = q_post_widder(q(qv), &transform, t, &cfg).unwrap();
                let mut errs = Vec::new();
                for e in &est {
                    let kf = e.k as f64;
                    let factor: f64 = (1..m).map(|j| (kf + j as f64) / kf).product();
                    let err = rel(e.estimate, exact * factor);
                    worst = worst.max(err);
                    if !(err <= 1e-12) {
                        failures.push(format!("q={qv} m={m} t={t} k={}: rel err {err:.3e}", e.k));
                    }
                    errs.push(rel(e.estimate, exact));
                }
                // monotone, and halving with each doubling of k
                let converging = errs.windows(2).all(|w| w[1] < w[0]);
                let rate = errs[errs.len() - 1] / errs[errs.len() - 2];
                if !converging || !(0.45..=0.55).contains(&rate) {
                    failures.push(format!("q={qv} m={m} t={t}: no convergence {errs:?}"));
                }
            }
        }
    }
    report(
        5,
        "q-Widder monomial law",
        &failures,
        &format!("worst {worst:.2e}"),
    );
}

#[test]
fn criterion_6_bridge_identities() {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for qv in [0.3, 0.6, 0.9] {
        let eps = 1.0 - qv;
        let b = 1.0 / eps + 2.0;
        let q1 = q_product(eps, 1);
        for n in 0..=30u32 {
            let exp_lhs = pochhammer(b, n) * eps.powi(n as i32);
            let exp_rhs = q_product(eps, n + 1) / q1;
            let gauss_lhs = pochhammer(b / 2.0, n) * pochhammer((b + 1.0) / 2.0, n);
            let gauss_rhs =
                q_product(eps, 2 * n + 1) / (4f64.powi(n as i32) * eps.powi(2 * n as i32) * q1);
            for (kind, l, r) in [
                ("exponential", exp_lhs, exp_rhs),
                ("gaussian", gauss_lhs, gauss_rhs),
            ] {
                let err = rel(l, r);
                worst = worst.max(err);
                if !(err <= 1e-12) {
                    failures.push(format!("{kind} q={qv} n={n}: rel err {err:.3e}"));
                }
            }
        }
    }
    report(
        6,
        "Pochhammer/Q bridge identities",
        &failures,
        &format!("worst {worst:.2e}"),
    );
}

#[test]
fn criterion_7_density_of_states() {
    let (volume, mass, h) = (2.0, 1.5, 1.3);
    let (omega, hbar) = (1.1, 0.9);
    let gas = ThermoModel::IdealGas(IdealGasModel::new(3, 2, volume, mass, h).unwrap());
    let osc = ThermoModel::Oscillator(OscillatorModel::new(1, 3, omega, hbar).unwrap());
    // classical prefactors: V^N (2πm)^{DN/2} / (h^{DN} N! (DN/2-1)!) and 1/((ħω)^{DN} (DN-1)!)
    let gas_classical =
        volume.powi(2) * (2.0 * std::f64::consts::PI * mass).powi(3) / (h.powi(6) * 2.0 * 2.0);
    let osc_classical = 1.0 / ((hbar * omega).powi(3) * 2.0);
    let energies = [0.5, 1.0, 2.0, 4.5];
    let cfg = WidderConfig::new(vec![16, 32, 64], XiMode::PerTerm, false).unwrap();
    let factor64 = (64.0 + 1.0) / 64.0 * (64.0 + 2.0) / 64.0;

    let mut failures = Vec::new();
    let mut worst_numeric: f64 = 0.0;
    for (name, model, classical) in [
        ("gas", gas, gas_classical),
        ("oscillator", osc, osc_classical),
    ] {
        let mut by_q = Vec::new();
        for qv in [0.3, 0.6, 0.9] {
            let dos = density_of_states(q(qv), &model, &energies, &cfg).unwrap();
            if (dos.exponent - 2.0).abs() > 0.0 {
                failures.push(format!("{name} q={qv}: exponent {}", dos.exponent));
            }
            for sample in &dos.samples {
                let e = sample.energy;
                let analytic_err = rel(sample.analytic, classical * e * e);
                if !(analytic_err <= 1e-12) {
                    failures.push(format!(
                        "{name} q={qv} E={e}: analytic off by {analytic_err:.3e}"
                    ));
                }
                if qv != 0.3 {
                    let k64 = sample.estimates.iter().find(|x| x.k == 64).unwrap();
                    let err = (k64.estimate / (sample.analytic * factor64) - 1.0).abs();
                    worst_numeric = worst_numeric.max(err);
                    if !(err <= 1e-10) {
                        failures.push(format!("{name} q={qv} E={e}: k=64 off by {err:.3e}"));
                    }
                }
            }
            by_q.push(dos.prefactor);
        }
        for p in &by_q[1..] {
            let err = rel(*p, by_q[0]);
            if !(err <= 1e-12) {
                failures.push(format!(
                    "{name}: prefactor varies with q ({p} vs {})",
                    by_q[0]
                ));
            }
        }
    }
    report(
        7,
        "density of states",
        &failures,
        &format!("worst k=64 deviation {worst_numeric:.2e}"),
    );
}

#[test]
fn criterion_8_identity_suite() {
    let cfg = QuadratureConfig::default();
    let tol = 1e-6;
    let mut failures = Vec::new();
    let mut count = 0;
    let mut check =
        |label: String, r: qlaplace::Result<qlaplace::transform::identities::CheckReport>| {
            count += 1;
            match r {
                Ok(r) if r.passes(tol) => {}
                Ok(r) => failures.push(format!(
                    "{label}: lhs {} rhs {} rel {:.3e}",
                    r.lhs, r.rhs, r.rel_err
                )),
                Err(e) => failures.push(format!("{label}: {e}")),
            }
        };
    let decay = CatalogFunction::Exponential {
        sign: Sign::Minus,
        alpha: 1.0,
    };
    let qdecay = CatalogFunction::QExponential {
        qprime: q(0.7),
        sign: Sign::Minus,
        alpha: 0.8,
    };
    let initial = [
        CatalogFunction::Monomial { m: 1 },
        CatalogFunction::Monomial { m: 2 },
        decay,
        CatalogFunction::Cosine { alpha: 1.5 },
        CatalogFunction::Gaussian { alpha: 0.5 },
    ];
    let qs = [0.6, 0.75, 0.9];
    for &qv in &qs {
        for f in &initial {
            check(
                format!("initial value {f} q={qv}"),
                limit_identity_check(q(qv), f, LimitKind::Initial, &cfg).map(|r| r.check),
            );
        }
        for f in [CatalogFunction::Monomial { m: 1 }, decay, qdecay] {
            check(
                format!("final value {f} q={qv}"),
                limit_identity_check(q(qv), &f, LimitKind::Final, &cfg).map(|r| r.check),
            );
        }
        for (f, a, s) in [
            (CatalogFunction::Monomial { m: 3 }, 2.0, 1.0),
            (decay, 0.5, 1.5),
            (CatalogFunction::Sine { alpha: 1.0 }, 3.0, 2.0),
        ] {
            check(
                format!("scaling {f} a={a} q={qv}"),
                scaling_check(q(qv), &f, a, s, &cfg),
            );
        }
        for (s, s0, t) in [(2.0, 1.0, 0.2), (1.0, 0.3, 0.5), (3.0, 2.5, 0.1)] {
            check(
                format!("shift kernel q={qv} s={s} s0={s0} t={t}"),
                shift_kernel_factor(q(qv), s, s0, t),
            );
        }
        for f in [
            CatalogFunction::Monomial { m: 2 },
            decay,
            CatalogFunction::Cosine { alpha: 0.7 },
        ] {
            check(
                format!("derivative rule {f} q={qv}"),
                derivative_rule_check(q(qv), &f, 1, 1.5, &cfg),
            );
        }
        for f in [CatalogFunction::Monomial { m: 2 }, decay] {
            check(
                format!("q-derivative of transform {f} q={qv}"),
                qderivative_of_transform_check(q(qv), &f, 1, 1.0, &cfg),
            );
        }
        for f in [
            CatalogFunction::Monomial { m: 3 },
            CatalogFunction::Sine { alpha: 1.0 },
        ] {
            check(
                format!("q-integral of transform {f} q={qv}"),
                qintegral_of_transform_check(q(qv), &f, 2.0, &cfg),
            );
        }
    }

    let grid = [0.5, 1.0, 2.0, 4.0];
    let mut spreads = Vec::new();
    for &qv in &qs {
        for f in [
            CatalogFunction::Monomial { m: 2 },
            CatalogFunction::Monomial { m: 3 },
        ] {
            match integral_rule_diagnostic(q(qv), &f, &grid, &cfg) {
                Ok(r) => {
                    spreads.push(format!(
                        "q={qv} {f}: ratio {:.10} spread {:.1e}",
                        r.mean_ratio, r.spread
                    ));
                    if !r.is_s_independent(1e-6) {
                        failures.push(format!("integral rule {f} q={qv}: spread {:.3e}", r.spread));
                    }
                }
                Err(e) => failures.push(format!("integral rule {f} q={qv}: {e}")),
            }
        }
    }
    let mut translations = Vec::new();
    for &qv in &qs {
        match translation_check(q(qv), &CatalogFunction::Monomial { m: 2 }, 0.2, 1.0, &cfg) {
            Ok(r) => translations.push(format!(
                "q={qv}: ratio {:.10} (alt {:.10})",
                r.ratio, r.alt_ratio
            )),
            Err(e) => failures.push(format!("translation q={qv}: {e}")),
        }
    }
    let mut info = std::io::stderr();
    for line in spreads.iter().chain(&translations) {
        let _ = writeln!(info, "    diagnostic {line}");
    }
    report(
        8,
        "transform identity suite",
        &failures,
        &format!("{count} checks"),
    );
}

#[test]
fn criterion_9_brute_force_partition() {
    let cfg = QuadratureConfig::default();
    let model = IdealGasModel::new(1, 2, 1.7, 0.8, 1.1).unwrap();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for qv in [0.3, 0.6, 0.9, 1.0] {
        for beta in [0.5, 2.0] {
            let brute = ideal_gas_partition_brute_force(
                q(qv),
                &model,
                beta,
                MomentumDomain::FullSpace,
                &cfg,
            )
            .unwrap();
            let closed = ideal_gas_partition(q(qv), &model, beta).unwrap();
            let err = rel(brute, closed);
            worst = worst.max(err);
            if !(err <= 1e-6) {
                failures.push(format!("q={qv} beta={beta}: brute {brute} closed {closed}"));
            }
        }
    }
    report(
        9,
        "brute-force partition function",
        &failures,
        &format!("worst {worst:.2e}"),
    );
}

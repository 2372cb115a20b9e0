//! One function per subcommand. Each returns the table to emit together with
//! any failed assertions.

use qlaplace::inverse::{monomial_finite_k_factor, q_post_widder, roundtrip, WidderConfig, XiMode};
use qlaplace::quadrature::QuadratureConfig;
use qlaplace::statmech::{density_of_states, IdealGasModel, OscillatorModel, ThermoModel};
use qlaplace::transform::identities::{
    convolution_check_classical, derivative_rule_check, integral_rule_diagnostic,
    limit_identity_check, linearity_check, qderivative_of_transform_check,
    qintegral_of_transform_check, scaling_check, shift_kernel_factor, translation_check,
    CheckReport, LimitKind,
};
use qlaplace::transform::{
    catalog_transform, transform_grid, AccuracyClass, CatalogFunction, Sign,
};
use qlaplace::QParam;

use crate::args::{
    IdentitiesArgs, InvertArgs, ModelArg, RoundtripArgs, StatmechArgs, TransformArgs, XiArg,
};
use crate::table::{Cell, Table};
use crate::CliError;

pub struct Outcome {
    pub table: Table,
    pub failures: Vec<String>,
}

fn rel_err(value: f64, reference: f64) -> f64 {
    let diff = (value - reference).abs();
    if reference == 0.0 {
        diff
    } else {
        diff / reference.abs()
    }
}

fn header(table: &mut Table, command: &str, q: QParam) {
    table.meta("generated-by", concat!("qlt ", env!("CARGO_PKG_VERSION")));
    table.meta("command", command);
    table.meta("q", q.value());
}

pub fn transform(args: &TransformArgs) -> Result<Outcome, CliError> {
    let q = QParam::new(args.q)?;
    let f = args.function.build()?;
    let closed = catalog_transform(q, &f, args.terms)?;
    let grid = args.s_grid.points();
    if let Some(s) = grid.iter().find(|s| !(**s >= closed.s_min())) {
        return Err(CliError::Config(format!(
            "s = {s} lies below s_min = {} where the closed-form series is trusted",
            closed.s_min()
        )));
    }
    let numeric = transform_grid(q, |t| f.eval(t), &grid, &QuadratureConfig::default())?;
    let tol = match f.accuracy_class() {
        AccuracyClass::Elementary => 1e-8,
        AccuracyClass::Hypergeometric => 1e-6,
    };

    let mut table = Table::new(vec!["s", "F_numeric", "F_catalog", "rel_err"]);
    header(&mut table, "transform", q);
    table.meta("function", f);
    table.meta("s_min", closed.s_min());
    table.meta("tolerance", tol);
    let mut failures = Vec::new();
    for (&s, &num) in grid.iter().zip(&numeric) {
        let exact = closed.eval(s);
        let err = rel_err(num, exact);
        if !(err <= tol) {
            failures.push(format!("s = {s}: rel_err {err:.3e} exceeds {tol:.0e}"));
        }
        table.push(vec![s.into(), num.into(), exact.into(), err.into()]);
    }
    Ok(Outcome { table, failures })
}

pub fn invert(args: &InvertArgs) -> Result<Outcome, CliError> {
    let q = QParam::new(args.q)?;
    let f = args.function.build()?;
    let transform = catalog_transform(q, &f, args.terms)?;
    let xi_mode = match args.xi {
        XiArg::PerTerm => XiMode::PerTerm,
        XiArg::Fixed(m) => XiMode::Fixed(m),
    };
    let cfg = WidderConfig::new(args.k_schedule.0.clone(), xi_mode, false)?;

    let mut table = Table::new(vec!["t", "k", "estimate", "analytic", "rel_err"]);
    header(&mut table, "invert", q);
    table.meta("function", f);
    let mut failures = Vec::new();
    for t in args.t_grid.points() {
        let analytic = f.eval(t);
        let estimates = q_post_widder(q, &transform, t, &cfg)?;
        let errs: Vec<f64> = estimates
            .iter()
            .map(|e| rel_err(e.estimate, analytic))
            .collect();
        for (e, err) in estimates.iter().zip(&errs) {
            table.push(vec![
                t.into(),
                e.k.into(),
                e.estimate.into(),
                analytic.into(),
                (*err).into(),
            ]);
        }
        let (first, last) = (errs[0], errs[errs.len() - 1]);
        if !(last <= first) {
            failures.push(format!(
                "t = {t}: error grew from {first:.3e} to {last:.3e} along the k schedule"
            ));
        }
    }
    Ok(Outcome { table, failures })
}

pub fn roundtrip_cmd(args: &RoundtripArgs) -> Result<Outcome, CliError> {
    let q = QParam::new(args.q)?;
    let f = args.function.build()?;
    let report = roundtrip(q, &f, args.terms)?;

    let mut table = Table::new(vec!["n", "recovered", "expected", "rel_err"]);
    header(&mut table, "roundtrip", q);
    table.meta("function", f);
    table.meta("t_max", report.t_max);
    for row in &report.coefficients {
        table.push(vec![
            row.n.into(),
            row.recovered.into(),
            row.expected.into(),
            row.rel_err.into(),
        ]);
    }
    let mut failures = Vec::new();
    if !(report.max_coeff_rel_err <= 1e-10) {
        failures.push(format!(
            "coefficient rel_err {:.3e} exceeds 1e-10",
            report.max_coeff_rel_err
        ));
    }
    Ok(Outcome { table, failures })
}

struct SuiteRow {
    identity: &'static str,
    function: String,
    s: f64,
    lhs: f64,
    rhs: f64,
    ratio: Option<f64>,
    rel_err: f64,
    /// `None` for report-only diagnostics
    pass: Option<bool>,
}

impl SuiteRow {
    fn from_check(
        identity: &'static str,
        function: String,
        s: f64,
        r: CheckReport,
        tol: f64,
    ) -> Self {
        SuiteRow {
            identity,
            function,
            s,
            lhs: r.lhs,
            rhs: r.rhs,
            ratio: (r.rhs != 0.0).then(|| r.lhs / r.rhs),
            rel_err: r.rel_err,
            pass: Some(r.passes(tol)),
        }
    }
}

pub fn identities(args: &IdentitiesArgs) -> Result<Outcome, CliError> {
    let q = QParam::new(args.q)?;
    if !(args.tol > 0.0) {
        return Err(CliError::Config(format!(
            "tolerance must be positive, got {}",
            args.tol
        )));
    }
    let tol = args.tol;
    let cfg = QuadratureConfig::default();
    let decay = CatalogFunction::Exponential {
        sign: Sign::Minus,
        alpha: 1.0,
    };
    let line = CatalogFunction::Monomial { m: 2 };
    let square = CatalogFunction::Monomial { m: 3 };
    let one = CatalogFunction::Monomial { m: 1 };
    let cosine = CatalogFunction::Cosine { alpha: 0.7 };
    let sine = CatalogFunction::Sine { alpha: 1.0 };

    let mut rows = Vec::new();
    for f in [line, decay, CatalogFunction::Cosine { alpha: 1.5 }] {
        let r = limit_identity_check(q, &f, LimitKind::Initial, &cfg)?;
        let s = r.ladder.last().map_or(f64::NAN, |p| p.0);
        rows.push(SuiteRow::from_check(
            "initial_value",
            f.to_string(),
            s,
            r.check,
            tol,
        ));
    }
    for f in [decay, one] {
        let r = limit_identity_check(q, &f, LimitKind::Final, &cfg)?;
        let s = r.ladder.last().map_or(f64::NAN, |p| p.0);
        rows.push(SuiteRow::from_check(
            "final_value",
            f.to_string(),
            s,
            r.check,
            tol,
        ));
    }
    for (f, a, s) in [(square, 2.0, 1.0), (sine, 3.0, 2.0)] {
        let r = scaling_check(q, &f, a, s, &cfg)?;
        rows.push(SuiteRow::from_check(
            "scaling",
            format!("{f}, a = {a}"),
            s,
            r,
            tol,
        ));
    }
    for (s, s0, t) in [(2.0, 1.0, 0.2), (1.0, 0.3, 0.5)] {
        let r = shift_kernel_factor(q, s, s0, t)?;
        rows.push(SuiteRow::from_check(
            "shift_kernel",
            format!("s0 = {s0}, t = {t}"),
            s,
            r,
            tol,
        ));
    }
    // the first-order rule needs 2q - 1 > 0
    if q.value() > 0.5 {
        for f in [line, cosine] {
            let r = derivative_rule_check(q, &f, 1, 1.5, &cfg)?;
            rows.push(SuiteRow::from_check(
                "derivative_rule",
                f.to_string(),
                1.5,
                r,
                tol,
            ));
        }
    }
    for f in [line, decay] {
        let r = qderivative_of_transform_check(q, &f, 1, 1.0, &cfg)?;
        rows.push(SuiteRow::from_check(
            "q_derivative_of_transform",
            f.to_string(),
            1.0,
            r,
            tol,
        ));
    }
    for f in [square, sine] {
        let r = qintegral_of_transform_check(q, &f, 2.0, &cfg)?;
        rows.push(SuiteRow::from_check(
            "q_integral_of_transform",
            f.to_string(),
            2.0,
            r,
            tol,
        ));
    }
    let r = linearity_check(
        q,
        (2.0, &CatalogFunction::Cosh { alpha: 0.5 }),
        (-0.5, &square),
        1.3,
        &cfg,
    )?;
    rows.push(SuiteRow::from_check(
        "linearity",
        "2 cosh(0.5 t) - 0.5 t^2".into(),
        1.3,
        r,
        tol,
    ));
    if q.is_classical() {
        let r = convolution_check_classical(&decay, &one, 1.0, &cfg)?;
        rows.push(SuiteRow::from_check(
            "convolution",
            format!("{decay} * {one}"),
            1.0,
            r,
            tol,
        ));
    }

    let grid = [0.5, 1.0, 2.0, 4.0];
    let ir = integral_rule_diagnostic(q, &line, &grid, &cfg)?;
    rows.push(SuiteRow {
        identity: "integral_rule",
        function: line.to_string(),
        s: grid[0],
        lhs: ir.ratios[0].1,
        rhs: ir.ratios[ir.ratios.len() - 1].1,
        ratio: Some(ir.mean_ratio),
        rel_err: ir.spread,
        pass: Some(ir.is_s_independent(tol)),
    });
    let tr = translation_check(q, &line, 0.2, 1.0, &cfg)?;
    rows.push(SuiteRow {
        identity: "translation",
        function: format!("{line}, t0 = 0.2"),
        s: 1.0,
        lhs: tr.lhs,
        rhs: tr.rhs,
        ratio: Some(tr.ratio),
        rel_err: rel_err(tr.rhs, tr.lhs),
        pass: None,
    });

    let mut table = Table::new(vec![
        "identity", "function", "s", "lhs", "rhs", "ratio", "rel_err", "status",
    ]);
    header(&mut table, "identities", q);
    table.meta("tolerance", tol);
    let mut failures = Vec::new();
    for r in rows {
        let status = match r.pass {
            Some(true) => "pass",
            Some(false) => {
                failures.push(format!(
                    "{} ({}): rel_err {:.3e}",
                    r.identity, r.function, r.rel_err
                ));
                "fail"
            }
            None => "report",
        };
        table.push(vec![
            r.identity.into(),
            r.function.into(),
            r.s.into(),
            r.lhs.into(),
            r.rhs.into(),
            r.ratio.map_or(Cell::Empty, Cell::Num),
            r.rel_err.into(),
            status.into(),
        ]);
    }
    Ok(Outcome { table, failures })
}

pub fn statmech(args: &StatmechArgs) -> Result<Outcome, CliError> {
    let q = QParam::new(args.q)?;
    let model = match args.model {
        ModelArg::IdealGas => ThermoModel::IdealGas(IdealGasModel::new(
            args.d,
            args.n,
            args.volume,
            args.mass,
            args.h,
        )?),
        ModelArg::Oscillator => {
            ThermoModel::Oscillator(OscillatorModel::new(args.d, args.n, args.omega, args.hbar)?)
        }
    };
    let cfg = WidderConfig::new(args.k_schedule.0.clone(), XiMode::PerTerm, false)?;
    let energies = args.e_grid.points();
    let dos = density_of_states(q, &model, &energies, &cfg)?;
    let k_max = *args.k_schedule.0.last().expect("schedule is non-empty");
    let factor = monomial_finite_k_factor(model.power(), k_max);

    let mut table = Table::new(vec!["E", "g_numeric", "g_analytic", "rel_err"]);
    header(&mut table, "statmech", q);
    table.meta(
        "model",
        match args.model {
            ModelArg::IdealGas => "ideal-gas",
            ModelArg::Oscillator => "oscillator",
        },
    );
    table.meta("D", args.d);
    table.meta("N", args.n);
    table.meta("prefactor", dos.prefactor);
    table.meta("exponent", dos.exponent);
    table.meta("k", k_max);
    table.meta("finite_k_factor", factor);
    let mut failures = Vec::new();
    for sample in &dos.samples {
        let numeric = sample.numeric();
        let deviation = (numeric / (sample.analytic * factor) - 1.0).abs();
        if !(deviation <= 1e-10) {
            failures.push(format!(
                "E = {}: numeric/analytic differs from the finite-k factor by {deviation:.3e}",
                sample.energy
            ));
        }
        table.push(vec![
            sample.energy.into(),
            numeric.into(),
            sample.analytic.into(),
            rel_err(numeric, sample.analytic).into(),
        ]);
    }
    Ok(Outcome { table, failures })
}

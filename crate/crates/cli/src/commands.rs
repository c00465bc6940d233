//! The `ortho`, `eval`, `verify` and `scan` subcommands.

use charpoly_ratios::oracle::oracle_expectation;
use charpoly_ratios::ratios::{
    confluent_expectation, expectation_decomposed, expectation_inverses, expectation_products,
    expectation_ratio, expectation_ratio_with_prefactor_scale,
};
use charpoly_ratios::{CauchyEvaluator, EvalResult, OracleMethod, OrthoSystem, RatioQuery, WeightSpec};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{RunConfig, ScanVariable};
use crate::output::{complex_json, fmt_f64, Report};
use crate::CliError;

const DEFAULT_ORTHO_DEGREE: usize = 8;

fn query_json(q: &RatioQuery) -> Value {
    json!({
        "n": q.n,
        "mus": q.mus.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
        "epsbars": q.epsbars.iter().map(|z| complex_json(*z)).collect::<Vec<_>>(),
        "confluent": q.mu_groups.as_ref().map(|gs| gs.iter().map(|g| json!({
            "value": complex_json(g.value),
            "multiplicity": g.multiplicity,
        })).collect::<Vec<_>>()),
    })
}

fn result_json(r: &EvalResult) -> Value {
    json!({
        "value": complex_json(r.value),
        "abs_error": r.abs_error,
        "diagnostics": {
            "det_conditioning": r.diagnostics.det_conditioning,
            "backend": r.diagnostics.backend,
            "warnings": r.diagnostics.warnings,
        },
    })
}

pub fn ortho(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.weight_spec()?;
    let degree = cfg.system.max_degree.unwrap_or(DEFAULT_ORTHO_DEGREE);
    let sys = OrthoSystem::for_weight(&spec, degree)?;
    let residuals = sys.orthogonality_residuals()?;
    let max_residual = residuals.iter().flatten().map(|r| r.norm()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut polys = Vec::new();
    for (k, p) in sys.polys.iter().enumerate() {
        for (power, a) in p.coeffs().iter().enumerate() {
            rows.push(vec![
                k.to_string(),
                fmt_f64(sys.norms[k]),
                power.to_string(),
                fmt_f64(a.re),
                fmt_f64(a.im),
            ]);
        }
        polys.push(json!({
            "degree": k,
            "coefficients": p.coeffs().iter().map(|a| complex_json(*a)).collect::<Vec<_>>(),
        }));
    }
    Ok(Report {
        json: json!({
            "command": "ortho",
            "weight": spec,
            "max_degree": degree,
            "norms": sys.norms,
            "polynomials": polys,
            "max_residual": max_residual,
            "residuals": residuals
                .iter()
                .map(|row| row.iter().map(|r| complex_json(*r)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
        header: vec!["degree", "norm", "power", "coeff_re", "coeff_im"],
        rows,
    })
}

fn system_for(cfg: &RunConfig, spec: &WeightSpec, q: &RatioQuery) -> Result<(OrthoSystem, CauchyEvaluator), CliError> {
    let sys = OrthoSystem::for_weight(spec, cfg.max_degree(q.n + q.l()))?;
    let cev = CauchyEvaluator::new(&sys);
    Ok((sys, cev))
}

fn evaluate(q: &RatioQuery, sys: &OrthoSystem, cev: &CauchyEvaluator) -> charpoly_ratios::Result<EvalResult> {
    if q.mu_groups.is_some() {
        confluent_expectation(q, sys, cev)
    } else {
        expectation_ratio(q, sys, cev)
    }
}

pub fn eval(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.weight_spec()?;
    let q = cfg.ratio_query()?;
    let (sys, cev) = system_for(cfg, &spec, &q)?;
    let r = evaluate(&q, &sys, &cev)?;
    let mut checks = Vec::new();
    if q.mu_groups.is_none() && q.l() + q.m() > 0 {
        let (path, other) = match (q.l(), q.m()) {
            (_, 0) => ("products", expectation_products(&q, &sys)?),
            (0, _) => ("inverses", expectation_inverses(&q, &sys, &cev)?),
            _ => ("decomposed", expectation_decomposed(&q, &sys, &cev)?),
        };
        checks.push(json!({
            "path": path,
            "value": complex_json(other.value),
            "abs_delta": (other.value - r.value).norm(),
        }));
    }
    let mut json = result_json(&r);
    json["command"] = json!("eval");
    json["query"] = query_json(&q);
    json["cross_checks"] = Value::Array(checks);
    Ok(Report {
        json,
        header: vec!["n", "l", "m", "value_re", "value_im", "abs_error", "det_conditioning", "backend"],
        rows: vec![vec![
            q.n.to_string(),
            q.l().to_string(),
            q.m().to_string(),
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(r.abs_error),
            fmt_f64(r.diagnostics.det_conditioning),
            r.diagnostics.backend.clone(),
        ]],
    })
}

/// `count` points at distance `gap` outside radius `support`, spread in angle.
fn placed(count: usize, support: f64, gap: f64, phase: f64) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(support + gap + 0.15 * j as f64, phase + 2.1 * j as f64))
        .collect()
}

struct Case {
    n: usize,
    l: usize,
    m: usize,
    formula: Option<Complex64>,
    oracle: Option<(Complex64, f64, usize)>,
    error: Option<String>,
    passed: bool,
}

/// Outcome of a verification sweep.
pub struct Verification {
    pub report: Report,
    pub all_passed: bool,
}

pub fn verify(cfg: &RunConfig) -> Result<Verification, CliError> {
    let spec = cfg.weight_spec()?;
    let oracle = cfg
        .oracle
        .ok_or_else(|| CliError::Config("verify needs an [oracle] block".into()))?;
    let v = cfg.verify.clone().unwrap_or_default();
    let max_l = v.l.iter().copied().max().unwrap_or(0);
    let max_n = v.n.iter().copied().max().unwrap_or(1);
    let sys = OrthoSystem::for_weight(&spec, cfg.max_degree(max_n + max_l).max(max_n + max_l))?;
    let cev = CauchyEvaluator::new(&sys);
    let mut cases = Vec::new();
    for &n in &v.n {
        let support = spec.support_radius(n);
        for &l in &v.l {
            for &m in v.m.iter().filter(|&&m| m <= n) {
                let mut case = Case {
                    n,
                    l,
                    m,
                    formula: None,
                    oracle: None,
                    error: None,
                    passed: false,
                };
                let outcome = (|| -> charpoly_ratios::Result<()> {
                    let q = RatioQuery::new(n, placed(l, support, v.gap, 0.3), placed(m, support, v.gap + 0.1, 1.1))?;
                    let f = expectation_ratio_with_prefactor_scale(&q, &sys, &cev, v.corrupt_prefactor)?.value;
                    case.formula = Some(f);
                    let o = oracle_expectation(&q, &spec, &oracle)?;
                    case.oracle = Some((o.value, o.stderr, o.samples));
                    let dev = (f - o.value).norm();
                    case.passed = match oracle.method {
                        OracleMethod::TensorQuadrature => dev <= v.tolerance * o.value.norm(),
                        OracleMethod::MonteCarlo => dev <= 3.0 * o.stderr,
                    };
                    Ok(())
                })();
                if let Err(e) = outcome {
                    case.error = Some(e.to_string());
                }
                cases.push(case);
            }
        }
    }
    let all_passed = cases.iter().all(|c| c.passed);
    let failed = cases.iter().filter(|c| !c.passed).count();
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for c in &cases {
        let dev = match (c.formula, c.oracle) {
            (Some(f), Some((o, _, _))) => Some(((f - o).norm(), (f - o).norm() / o.norm())),
            _ => None,
        };
        let status = match (&c.error, c.passed) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "pass".into(),
            (None, false) => "fail".into(),
        };
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        rows.push(vec![
            c.n.to_string(),
            c.l.to_string(),
            c.m.to_string(),
            opt(c.formula.map(|z| z.re)),
            opt(c.formula.map(|z| z.im)),
            opt(c.oracle.map(|o| o.0.re)),
            opt(c.oracle.map(|o| o.0.im)),
            opt(c.oracle.map(|o| o.1)),
            opt(dev.map(|d| d.0)),
            opt(dev.map(|d| d.1)),
            status.clone(),
        ]);
        items.push(json!({
            "case": format!("N={} L={} M={}", c.n, c.l, c.m),
            "n": c.n,
            "l": c.l,
            "m": c.m,
            "formula": c.formula.map(complex_json),
            "oracle": c.oracle.map(|(value, stderr, samples)| json!({
                "value": complex_json(value),
                "stderr": stderr,
                "samples": samples,
                "seed": oracle.seed,
            })),
            "abs_dev": dev.map(|d| d.0),
            "rel_dev": dev.map(|d| d.1),
            "status": status,
        }));
    }
    Ok(Verification {
        report: Report {
            json: json!({
                "command": "verify",
                "method": oracle.method,
                "tolerance": v.tolerance,
                "cases": items,
                "summary": { "total": cases.len(), "passed": cases.len() - failed, "failed": failed },
            }),
            header: vec![
                "n", "l", "m", "formula_re", "formula_im", "oracle_re", "oracle_im", "stderr", "abs_dev", "rel_dev",
                "status",
            ],
            rows,
        },
        all_passed,
    })
}

pub fn scan(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.weight_spec()?;
    let s = cfg
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("scan needs a [scan] block".into()))?;
    let base = cfg.ratio_query()?;
    let len = match s.variable {
        ScanVariable::Mu => base.l(),
        ScanVariable::Epsbar => base.m(),
    };
    if s.index >= len {
        return Err(CliError::Config(format!(
            "scan.index {} is out of range for {} query variables",
            s.index, len
        )));
    }
    if base.mu_groups.is_some() && s.variable == ScanVariable::Mu {
        return Err(CliError::Config("scanning a confluent mu is not supported".into()));
    }
    let (sys, cev) = system_for(cfg, &spec, &base)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for p in 0..s.points {
        let t = if s.points == 1 { 0.0 } else { p as f64 / (s.points - 1) as f64 };
        let x = s.start.0 + (s.end.0 - s.start.0) * t;
        let mut q = base.clone();
        match s.variable {
            ScanVariable::Mu => q.mus[s.index] = x,
            ScanVariable::Epsbar => q.epsbars[s.index] = x,
        }
        let r = q.validate().and_then(|_| evaluate(&q, &sys, &cev));
        let (value, err, status) = match &r {
            Ok(r) => (Some(r.value), Some(r.abs_error), "ok".to_string()),
            Err(e) => (None, None, format!("error: {e}")),
        };
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        rows.push(vec![
            p.to_string(),
            fmt_f64(x.re),
            fmt_f64(x.im),
            opt(value.map(|v| v.re)),
            opt(value.map(|v| v.im)),
            opt(err),
            status.clone(),
        ]);
        items.push(json!({
            "point": p,
            "variable": complex_json(x),
            "value": value.map(complex_json),
            "abs_error": err,
            "status": status,
        }));
    }
    Ok(Report {
        json: json!({ "command": "scan", "variable": s.variable, "index": s.index, "rows": items }),
        header: vec!["point", "var_re", "var_im", "value_re", "value_im", "abs_error", "status"],
        rows,
    })
}

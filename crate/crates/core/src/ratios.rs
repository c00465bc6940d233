//! Averages of ratios of characteristic polynomials,
//! `⟨ ∏_j D_N[μ_j] / ∏_k D_N†[ε̄_k] ⟩_w`, as one determinant of orthogonal
//! polynomials and their Cauchy transforms, together with the telescoping
//! products that build it up one variable at a time.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::{CauchyEvaluator, CauchyMethod, INSIDE_DOMAIN_WARNING};
use crate::deformed::{
    bordered_rows, check_distinct, christoffel_poly, combined_poly, deformed_cauchy, expand_groups, MuGroup, PiRow,
};
use crate::error::{Error, Result};
use crate::linalg::log_determinant;
use crate::orthopoly::{partition_function, OrthoSystem, Poly};

/// `(N, {μ_j}, {ε̄_k})`, optionally with the μ's given as confluent groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioQuery {
    pub n: usize,
    pub mus: Vec<Complex64>,
    pub epsbars: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_groups: Option<Vec<MuGroup>>,
}

impl RatioQuery {
    pub fn new(n: usize, mus: Vec<Complex64>, epsbars: Vec<Complex64>) -> Result<Self> {
        let q = RatioQuery {
            n,
            mus,
            epsbars,
            mu_groups: None,
        };
        q.validate()?;
        Ok(q)
    }

    /// Query whose μ's coincide within each group.
    pub fn confluent(n: usize, groups: Vec<MuGroup>, epsbars: Vec<Complex64>) -> Result<Self> {
        let mus = groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.value, g.multiplicity))
            .collect();
        let q = RatioQuery {
            n,
            mus,
            epsbars,
            mu_groups: Some(groups),
        };
        q.validate()?;
        Ok(q)
    }

    /// Number of characteristic polynomials in the numerator.
    pub fn l(&self) -> usize {
        self.mus.len()
    }

    /// Number of conjugate characteristic polynomials in the denominator.
    pub fn m(&self) -> usize {
        self.epsbars.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Constraint("N must be at least 1".into()));
        }
        if self.m() > self.n {
            return Err(Error::Constraint(format!(
                "M <= N required (M = {}, N = {})",
                self.m(),
                self.n
            )));
        }
        check_distinct(&self.epsbars, "epsbars")?;
        match &self.mu_groups {
            None => check_distinct(&self.mus, "mus"),
            Some(groups) => {
                if groups.iter().any(|g| g.multiplicity == 0) {
                    return Err(Error::Constraint("confluent multiplicities must be >= 1".into()));
                }
                let expanded: Vec<Complex64> = groups
                    .iter()
                    .flat_map(|g| std::iter::repeat_n(g.value, g.multiplicity))
                    .collect();
                if expanded != self.mus {
                    return Err(Error::Constraint("mus do not match the declared confluent groups".into()));
                }
                let values: Vec<Complex64> = groups.iter().map(|g| g.value).collect();
                check_distinct(&values, "mus")
            }
        }
    }

    /// Groups of the μ's; every μ is its own group when none were declared.
    pub fn groups(&self) -> Vec<MuGroup> {
        self.mu_groups.clone().unwrap_or_else(|| {
            self.mus
                .iter()
                .map(|&value| MuGroup { value, multiplicity: 1 })
                .collect()
        })
    }

    /// The same query with every variable conjugated.
    pub fn conjugated(&self) -> RatioQuery {
        RatioQuery {
            n: self.n,
            mus: self.mus.iter().map(|m| m.conj()).collect(),
            epsbars: self.epsbars.iter().map(|e| e.conj()).collect(),
            mu_groups: self.mu_groups.as_ref().map(|gs| {
                gs.iter()
                    .map(|g| MuGroup {
                        value: g.value.conj(),
                        multiplicity: g.multiplicity,
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Pivot ratio of the main determinant.
    pub det_conditioning: f64,
    pub backend: String,
    pub warnings: Vec<String>,
}

/// A computed average with an absolute error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub abs_error: f64,
    pub diagnostics: Diagnostics,
}

impl EvalResult {
    fn checked(self, what: &'static str) -> Result<Self> {
        let v = self.value;
        if !(v.re.is_finite() && v.im.is_finite() && self.abs_error.is_finite()) {
            return Err(Error::NonFinite(what));
        }
        Ok(self)
    }

    fn exact_one(backend: &str) -> Self {
        EvalResult {
            value: Complex64::new(1.0, 0.0),
            abs_error: 0.0,
            diagnostics: Diagnostics {
                det_conditioning: 1.0,
                backend: backend.into(),
                warnings: Vec::new(),
            },
        }
    }
}

fn backend_tag(cev: &CauchyEvaluator) -> &'static str {
    match cev.method {
        CauchyMethod::RotinvSeries => "determinant/rotinv-series",
        CauchyMethod::Quadrature => "determinant/quadrature",
    }
}

/// `log |Δ|` and phase of the (confluent) Vandermonde of grouped values,
/// `∏_{a<b} (x_b − x_a)^{m_a m_b} · ∏_a ∏_{k<m_a} k!`.
fn vandermonde(groups: &[MuGroup]) -> (f64, Complex64) {
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for (b, gb) in groups.iter().enumerate() {
        for ga in &groups[..b] {
            let d = gb.value - ga.value;
            let power = (ga.multiplicity * gb.multiplicity) as f64;
            log_abs += power * d.norm().ln();
            phase *= Complex64::from_polar(1.0, power * d.arg());
        }
        for k in 2..gb.multiplicity {
            log_abs += ((2..=k).map(|i| i as f64).product::<f64>()).ln();
        }
    }
    (log_abs, phase)
}

fn distinct_groups(values: &[Complex64]) -> Vec<MuGroup> {
    values
        .iter()
        .map(|&value| MuGroup { value, multiplicity: 1 })
        .collect()
}

/// Determinant formula with its prefactor multiplied by `prefactor_scale`
/// (`1.0` in normal operation; other values only exercise verification).
fn determinant_formula(
    q: &RatioQuery,
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    prefactor_scale: f64,
) -> Result<EvalResult> {
    q.validate()?;
    let (n, l, m) = (q.n, q.l(), q.m());
    if l == 0 && m == 0 {
        return Ok(EvalResult::exact_one(backend_tag(cev)));
    }
    let first = n - m;
    let end = n + l;
    sys.require_degree(end - 1)?;

    let groups = q.groups();
    let pi_rows: Vec<PiRow> = expand_groups(&groups);
    let mut warnings = Vec::new();
    let mut rel_input_error: f64 = 0.0;
    let mut rows = Vec::with_capacity(l + m);
    for &e in &q.epsbars {
        let row = cev.transforms(first..end, e)?;
        if row.inside_domain && cev.method == CauchyMethod::Quadrature {
            warnings.push(format!("{INSIDE_DOMAIN_WARNING} at epsbar = {e}"));
        }
        let scale = row.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let err = row.errors.iter().cloned().fold(0.0, f64::max);
        if scale > 0.0 {
            rel_input_error = rel_input_error.max(err / scale);
        }
        rows.push(row.values);
    }
    rows.extend(bordered_rows(sys, None, &[], &pi_rows, first..end)?);

    let det = log_determinant(rows);
    let (log_dl, phase_dl) = vandermonde(&groups);
    let (log_dm, phase_dm) = vandermonde(&distinct_groups(&q.epsbars));

    // ∏_{j=N−M}^{N−1} 2π/(i r_j) = ∏ (−i)·2π/r_j, then (−1)^{M(M−1)/2}
    let mut log_abs = det.log_abs - log_dl - log_dm;
    for j in first..n {
        log_abs += (2.0 * PI / sys.norms[j]).ln();
    }
    let mut phase = det.phase / (phase_dl * phase_dm) * Complex64::new(0.0, -1.0).powu(m as u32);
    if (m * m.saturating_sub(1) / 2) % 2 == 1 {
        phase = -phase;
    }
    let value = if det.is_zero() {
        Complex64::new(0.0, 0.0)
    } else {
        phase * log_abs.exp() * prefactor_scale
    };
    let conditioning = det.pivot_ratio;
    let dim = (l + m) as f64;
    let abs_error = value.norm() * conditioning.min(1e16) * (rel_input_error + 4.0 * dim * f64::EPSILON);
    EvalResult {
        value,
        abs_error,
        diagnostics: Diagnostics {
            det_conditioning: conditioning,
            backend: backend_tag(cev).into(),
            warnings,
        },
    }
    .checked("expectation_ratio")
}

/// The determinant formula for `⟨ ∏ D_N[μ_j] / ∏ D_N†[ε̄_k] ⟩_w`.
///
/// Confluent μ groups are handled by derivative rows.
pub fn expectation_ratio(q: &RatioQuery, sys: &OrthoSystem, cev: &CauchyEvaluator) -> Result<EvalResult> {
    determinant_formula(q, sys, cev, 1.0)
}

/// [`expectation_ratio`] with its prefactor multiplied by `scale`; only for
/// exercising verification harnesses against a known-wrong formula.
pub fn expectation_ratio_with_prefactor_scale(
    q: &RatioQuery,
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    scale: f64,
) -> Result<EvalResult> {
    determinant_formula(q, sys, cev, scale)
}

/// Coinciding-μ evaluation; every μ counts as its own group when the query
/// declares none.
pub fn confluent_expectation(q: &RatioQuery, sys: &OrthoSystem, cev: &CauchyEvaluator) -> Result<EvalResult> {
    let mut q = q.clone();
    if q.mu_groups.is_none() {
        q.mu_groups = Some(q.groups());
    }
    determinant_formula(&q, sys, cev, 1.0)
}

/// `⟨ ∏ D_N[μ_j] ⟩ = ∏_{j<L} π_N^{[j,0]}(μ_{j+1})`, each factor from the
/// Christoffel formula for the first `j` μ's.
pub fn expectation_products(q: &RatioQuery, sys: &OrthoSystem) -> Result<EvalResult> {
    q.validate()?;
    if q.m() != 0 {
        return Err(Error::Constraint("expectation_products needs M = 0".into()));
    }
    if q.mu_groups.is_some() {
        return Err(Error::Constraint("telescoping products need distinct mus".into()));
    }
    let mut value = Complex64::new(1.0, 0.0);
    let mut conditioning: f64 = 1.0;
    for j in 0..q.l() {
        let r = christoffel_poly(sys, &q.mus[..j], q.n, q.mus[j])?;
        value *= r.value;
        conditioning = conditioning.max(r.conditioning);
    }
    EvalResult {
        value,
        abs_error: value.norm() * conditioning * 4.0 * (q.l().max(1) as f64) * f64::EPSILON,
        diagnostics: Diagnostics {
            det_conditioning: conditioning,
            backend: "telescope/christoffel".into(),
            warnings: Vec::new(),
        },
    }
    .checked("expectation_products")
}

/// `⟨ ∏ D_N†[ε̄_k]⁻¹ ⟩ = ∏_{j=1}^{M} (−2πi / r_{N−j}) h_{N−j}^{[0,M−j]}(ε̄_{M−j+1})`.
pub fn expectation_inverses(q: &RatioQuery, sys: &OrthoSystem, cev: &CauchyEvaluator) -> Result<EvalResult> {
    q.validate()?;
    if q.l() != 0 {
        return Err(Error::Constraint("expectation_inverses needs L = 0".into()));
    }
    let (value, warnings) = inverse_telescope(q.n, &q.epsbars, sys, cev)?;
    EvalResult {
        value,
        abs_error: value.norm() * (q.m().max(1) as f64) * cev.tolerance.max(f64::EPSILON),
        diagnostics: Diagnostics {
            det_conditioning: 1.0,
            backend: "telescope/uvarov".into(),
            warnings,
        },
    }
    .checked("expectation_inverses")
}

fn inverse_telescope(
    n: usize,
    epsbars: &[Complex64],
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
) -> Result<(Complex64, Vec<String>)> {
    let m = epsbars.len();
    let mut value = Complex64::new(1.0, 0.0);
    for j in 1..=m {
        let h = deformed_cauchy(sys, cev, &epsbars[..m - j], n - j, epsbars[m - j])?;
        value *= Complex64::new(0.0, -2.0 * PI / sys.norm(n - j)?) * h;
    }
    Ok((value, Vec::new()))
}

/// Full telescope: `∏_{j<L} π_N^{[j,M]}(μ_{j+1}) · ⟨ ∏ D_N†[ε̄_k]⁻¹ ⟩`,
/// using the combined Christoffel–Uvarov polynomials.
pub fn expectation_decomposed(q: &RatioQuery, sys: &OrthoSystem, cev: &CauchyEvaluator) -> Result<EvalResult> {
    q.validate()?;
    if q.mu_groups.is_some() {
        return Err(Error::Constraint("telescoping products need distinct mus".into()));
    }
    let (mut value, warnings) = inverse_telescope(q.n, &q.epsbars, sys, cev)?;
    let mut conditioning: f64 = 1.0;
    for j in 0..q.l() {
        let r = combined_poly(sys, cev, &q.mus[..j], &q.epsbars, q.n, q.mus[j])?;
        value *= r.value;
        conditioning = conditioning.max(r.conditioning);
    }
    EvalResult {
        value,
        abs_error: value.norm() * conditioning * ((q.l() + q.m()).max(1) as f64) * cev.tolerance.max(f64::EPSILON),
        diagnostics: Diagnostics {
            det_conditioning: conditioning,
            backend: "telescope/combined".into(),
            warnings,
        },
    }
    .checked("expectation_decomposed")
}

/// `⟨ D_N†[ε̄]⁻¹ ⟩ = −2πi N (Z_{N−1}/Z_N) h_{N−1}(ε̄)`.
pub fn heine_inverse(n: usize, epsbar: Complex64, sys: &OrthoSystem, cev: &CauchyEvaluator) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Constraint("N must be at least 1".into()));
    }
    let ratio = partition_function(sys, n - 1)? / partition_function(sys, n)?;
    Ok(Complex64::new(0.0, -2.0 * PI * n as f64 * ratio) * cev.transform(n - 1, epsbar)?)
}

/// `x^j / ∏_k (ε̄_k − x) = Σ_k a_k /(ε̄_k − x) + p(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractions {
    pub poles: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    pub remainder: Poly,
}

impl PartialFractions {
    pub fn eval(&self, x: Complex64) -> Complex64 {
        let poles: Complex64 = self
            .poles
            .iter()
            .zip(&self.coefficients)
            .map(|(e, a)| a / (e - x))
            .sum();
        poles + self.remainder.eval(x)
    }
}

/// Partial-fraction decomposition with
/// `a_k = ε̄_k^j / ∏_{l≠k} (ε̄_l − ε̄_k)` and polynomial part of degree `j − m`.
pub fn partial_fractions(j: usize, epsbars: &[Complex64]) -> Result<PartialFractions> {
    if epsbars.is_empty() {
        return Err(Error::Constraint("partial fractions need at least one pole".into()));
    }
    check_distinct(epsbars, "epsbars")?;
    let coefficients = epsbars
        .iter()
        .enumerate()
        .map(|(k, ek)| {
            let den: Complex64 = epsbars
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, el)| el - ek)
                .product();
            ek.powu(j as u32) / den
        })
        .collect();
    // ∏ (ε̄_k − x) = (−1)^m ∏ (x − ε̄_k)
    let mut monomial = vec![Complex64::new(0.0, 0.0); j + 1];
    monomial[j] = Complex64::new(1.0, 0.0);
    let (quot, _) = Poly::new(monomial).div_rem(&Poly::from_roots(epsbars));
    let sign = if epsbars.len().is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(PartialFractions {
        poles: epsbars.to_vec(),
        coefficients,
        remainder: quot.scale(Complex64::new(sign, 0.0)),
    })
}

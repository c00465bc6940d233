//! Orthogonal polynomials and Cauchy transforms of the deformed measures
//! `dw^{[ℓ,m]} = ∏_j (μ_j − z) / ∏_k (ε̄_k − z̄) dw`.
//!
//! All constructions are bordered determinants in the base `π_k` and `h_k`:
//! the Christoffel formula (`m = 0`), the Uvarov formula (`ℓ = 0`) and their
//! combination, each normalized to a monic polynomial of degree `n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cauchy::CauchyEvaluator;
use crate::error::{Error, Result};
use crate::linalg::{log_determinant, LogDet, Rows};
use crate::orthopoly::{MonicPoly, OrthoSystem, Poly};

/// Relative distance below which two variables count as coinciding.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Multiplication and division points of a deformed measure.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Deformation {
    pub mus: Vec<Complex64>,
    pub epsbars: Vec<Complex64>,
}

impl Deformation {
    pub fn new(mus: Vec<Complex64>, epsbars: Vec<Complex64>) -> Result<Self> {
        check_distinct(&mus, "mus")?;
        check_distinct(&epsbars, "epsbars")?;
        Ok(Deformation { mus, epsbars })
    }

    /// `∏ (μ_j − z) / ∏ (ε̄_k − z̄)`.
    pub fn factor(&self, z: Complex64) -> Complex64 {
        let num: Complex64 = self.mus.iter().map(|m| m - z).product();
        let den: Complex64 = self.epsbars.iter().map(|e| e - z.conj()).product();
        num / den
    }
}

/// A value with the multiplicity it carries in a confluent list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuGroup {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Rejects lists with two entries closer than [`DEGENERACY_THRESHOLD`]
/// relative to `max(1, max |x|, max pairwise distance)`.
pub fn check_distinct(values: &[Complex64], list: &'static str) -> Result<()> {
    let mut scale: f64 = 1.0;
    for (i, a) in values.iter().enumerate() {
        scale = scale.max(a.norm());
        for b in &values[i + 1..] {
            scale = scale.max((a - b).norm());
        }
    }
    for (i, a) in values.iter().enumerate() {
        for (j, b) in values.iter().enumerate().skip(i + 1) {
            let distance = (a - b).norm();
            if distance < DEGENERACY_THRESHOLD * scale {
                return Err(Error::DegenerateVariables {
                    list,
                    first: i,
                    second: j,
                    distance,
                });
            }
        }
    }
    Ok(())
}

/// Value of a deformed polynomial at a point, with the determinants it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedPolyResult {
    pub value: Complex64,
    pub numerator: Complex64,
    pub denominator: Complex64,
    /// Pivot ratio of the denominator determinant.
    pub conditioning: f64,
}

/// One `π` row of a bordered determinant: `π_k^{(derivative)}(at)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PiRow {
    pub at: Complex64,
    pub derivative: usize,
}

pub(crate) fn expand_groups(groups: &[MuGroup]) -> Vec<PiRow> {
    groups
        .iter()
        .flat_map(|g| (0..g.multiplicity).map(move |d| PiRow { at: g.value, derivative: d }))
        .collect()
}

fn distinct_rows(mus: &[Complex64]) -> Vec<PiRow> {
    mus.iter().map(|&at| PiRow { at, derivative: 0 }).collect()
}

/// Rows `h_k(ε̄_j)` over `cols` followed by rows `π_k^{(d)}(μ)`.
pub(crate) fn bordered_rows(
    sys: &OrthoSystem,
    cev: Option<&CauchyEvaluator>,
    epsbars: &[Complex64],
    pi_rows: &[PiRow],
    cols: std::ops::Range<usize>,
) -> Result<Rows> {
    let mut rows = Vec::with_capacity(epsbars.len() + pi_rows.len());
    if !epsbars.is_empty() {
        let cev = cev.ok_or_else(|| Error::Constraint("Cauchy evaluator required".into()))?;
        for &e in epsbars {
            rows.push(cev.transforms(cols.clone(), e)?.values);
        }
    }
    for r in pi_rows {
        rows.push(sys.eval_derivative_range(cols.clone(), r.derivative, r.at)?);
    }
    Ok(rows)
}

struct Bordered {
    /// Leading block, shared by numerator and denominator.
    rows: Rows,
    first: usize,
    width: usize,
    denominator: LogDet,
}

fn prepare(
    sys: &OrthoSystem,
    cev: Option<&CauchyEvaluator>,
    epsbars: &[Complex64],
    pi_rows: &[PiRow],
    n: usize,
) -> Result<Bordered> {
    let m = epsbars.len();
    let l = pi_rows.len();
    if m > n {
        return Err(Error::Constraint(format!(
            "deformation with m = {m} poles needs degree n >= m, got n = {n}"
        )));
    }
    sys.require_degree(n + l)?;
    let first = n - m;
    let width = m + l + 1;
    let rows = bordered_rows(sys, cev, epsbars, pi_rows, first..first + width)?;
    let minor: Rows = rows.iter().map(|r| r[..width - 1].to_vec()).collect();
    let denominator = log_determinant(minor);
    if denominator.is_zero() || denominator.pivot_ratio > 1e14 {
        return Err(Error::SingularDeterminant {
            what: "normalizing minor",
            conditioning: denominator.pivot_ratio,
        });
    }
    Ok(Bordered {
        rows,
        first,
        width,
        denominator,
    })
}

impl Bordered {
    fn numerator_at(&self, sys: &OrthoSystem, z: Complex64) -> Result<LogDet> {
        let mut rows = self.rows.clone();
        rows.push(sys.eval_range(self.first..self.first + self.width, z)?);
        Ok(log_determinant(rows))
    }

    /// Coefficients of the numerator polynomial `q(z)` divided by the
    /// denominator, from the cofactor expansion along the last row.
    fn numerator_poly(&self, sys: &OrthoSystem) -> Poly {
        let w = self.width;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.first + w];
        for c in 0..w {
            let minor: Rows = self
                .rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(i, _)| *i != c).map(|(_, v)| *v).collect())
                .collect();
            let sign = if (w - 1 + c).is_multiple_of(2) { 1.0 } else { -1.0 };
            let cof = log_determinant(minor).ratio(&self.denominator) * sign;
            for (i, p) in sys.polys[self.first + c].coeffs().iter().enumerate() {
                acc[i] += cof * p;
            }
        }
        Poly::new(acc)
    }
}

fn evaluate(
    sys: &OrthoSystem,
    cev: Option<&CauchyEvaluator>,
    epsbars: &[Complex64],
    pi_rows: &[PiRow],
    n: usize,
    z: Complex64,
) -> Result<DeformedPolyResult> {
    let b = prepare(sys, cev, epsbars, pi_rows, n)?;
    let near_root = pi_rows.iter().any(|r| (z - r.at).norm() <= DEGENERACY_THRESHOLD * r.at.norm().max(1.0));
    let numerator = b.numerator_at(sys, z)?;
    let value = if near_root {
        monic_from(&b, sys, pi_rows)?.eval(z)
    } else {
        let roots: Complex64 = pi_rows.iter().map(|r| z - r.at).product();
        numerator.ratio(&b.denominator) / roots
    };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite("deformed polynomial"));
    }
    Ok(DeformedPolyResult {
        value,
        numerator: numerator.value(),
        denominator: b.denominator.value(),
        conditioning: b.denominator.pivot_ratio,
    })
}

fn monic_from(b: &Bordered, sys: &OrthoSystem, pi_rows: &[PiRow]) -> Result<MonicPoly> {
    let q = b.numerator_poly(sys);
    let roots: Vec<Complex64> = pi_rows.iter().map(|r| r.at).collect();
    let (quot, _rem) = q.div_rem(&Poly::from_roots(&roots));
    MonicPoly::normalized(&quot)
}

/// `π_n^{[ℓ,0]}(z)`: Christoffel formula for the weight multiplied by
/// `∏ (μ_j − z)`.
pub fn christoffel_poly(sys: &OrthoSystem, mus: &[Complex64], n: usize, z: Complex64) -> Result<DeformedPolyResult> {
    check_distinct(mus, "mus")?;
    evaluate(sys, None, &[], &distinct_rows(mus), n, z)
}

/// Christoffel formula with coinciding multiplication points: repeated
/// rows are replaced by successive derivatives.
pub fn christoffel_poly_confluent(
    sys: &OrthoSystem,
    groups: &[MuGroup],
    n: usize,
    z: Complex64,
) -> Result<DeformedPolyResult> {
    let values: Vec<Complex64> = groups.iter().map(|g| g.value).collect();
    check_distinct(&values, "mus")?;
    evaluate(sys, None, &[], &expand_groups(groups), n, z)
}

/// The bordered numerator `q_n^{[ℓ,0]}(z)` of the Christoffel formula.
pub fn christoffel_numerator(sys: &OrthoSystem, mus: &[Complex64], n: usize, z: Complex64) -> Result<Complex64> {
    sys.require_degree(n + mus.len())?;
    let mut rows = bordered_rows(sys, None, &[], &distinct_rows(mus), n..n + mus.len() + 1)?;
    rows.push(sys.eval_range(n..n + mus.len() + 1, z)?);
    Ok(log_determinant(rows).value())
}

/// `π_n^{[0,m]}(z)`: Uvarov formula for the weight divided by `∏ (ε̄_k − z̄)`.
pub fn uvarov_poly(
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    epsbars: &[Complex64],
    n: usize,
    z: Complex64,
) -> Result<DeformedPolyResult> {
    check_distinct(epsbars, "epsbars")?;
    evaluate(sys, Some(cev), epsbars, &[], n, z)
}

/// `π_n^{[ℓ,m]}(z)` for the fully deformed weight.
pub fn combined_poly(
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    mus: &[Complex64],
    epsbars: &[Complex64],
    n: usize,
    z: Complex64,
) -> Result<DeformedPolyResult> {
    check_distinct(mus, "mus")?;
    check_distinct(epsbars, "epsbars")?;
    evaluate(sys, Some(cev), epsbars, &distinct_rows(mus), n, z)
}

/// Coefficients of `π_n^{[ℓ,m]}`, recovered by cofactor expansion and exact
/// division by `∏ (z − μ_j)`.
pub fn deformed_poly_coefficients(
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    deformation: &Deformation,
    n: usize,
) -> Result<MonicPoly> {
    check_distinct(&deformation.mus, "mus")?;
    check_distinct(&deformation.epsbars, "epsbars")?;
    let rows = distinct_rows(&deformation.mus);
    let b = prepare(sys, Some(cev), &deformation.epsbars, &rows, n)?;
    monic_from(&b, sys, &rows)
}

/// `h_n^{[0,m]}(ε̄)`: Cauchy transform of `π_n^{[0,m]}` under the measure
/// divided by `∏ (ε̄_k − z̄)`.
pub fn deformed_cauchy(
    sys: &OrthoSystem,
    cev: &CauchyEvaluator,
    epsbars: &[Complex64],
    n: usize,
    epsbar: Complex64,
) -> Result<Complex64> {
    let m = epsbars.len();
    if m > n {
        return Err(Error::Constraint(format!(
            "deformed Cauchy transform needs n >= m, got n = {n}, m = {m}"
        )));
    }
    let mut all = epsbars.to_vec();
    all.push(epsbar);
    check_distinct(&all, "epsbars")?;
    sys.require_degree(n)?;
    let rows = bordered_rows(sys, Some(cev), &all, &[], n - m..n + 1)?;
    let minor: Rows = rows[..m].iter().map(|r| r[..m].to_vec()).collect();
    let den = log_determinant(minor);
    if den.is_zero() {
        return Err(Error::SingularDeterminant {
            what: "Cauchy minor",
            conditioning: den.pivot_ratio,
        });
    }
    let num = log_determinant(rows);
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let poles: Complex64 = epsbars.iter().map(|e| epsbar - e).product();
    let value = num.ratio(&den) * sign / poles;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::NonFinite("deformed Cauchy transform"));
    }
    Ok(value)
}

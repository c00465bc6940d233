//! Cauchy transforms `h_n(ε̄) = (1/2πi) ∫_D dw π_n(z) /(z̄ − ε̄)`.
//!
//! Arguments are always the barred variable `ε̄`; the pole of the integrand
//! sits at `z = conj(ε̄)`. The companion transform with `z − ε` in the
//! denominator is not provided: it reduces to the `π_{k<n}` and `h_0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::orthopoly::{OrthoSystem, Poly};
use crate::quadrature::{adaptive, pole_placement, pole_rule, PolePlacement};
use crate::weight::{Family, MomentStrategy, WeightSpec};

pub const DEFAULT_CAUCHY_TOLERANCE: f64 = 1e-10;

pub const INSIDE_DOMAIN_WARNING: &str = "singularity inside domain";

/// Backend used to evaluate `h_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CauchyMethod {
    /// Closed form for rotation-invariant built-in weights: only the
    /// `r < |ε|` part of the radial mass contributes,
    /// `h_n(ε̄) = i ε̄^{−(n+1)} ∫_0^{|ε|} r^{2n+1} w(r) dr`.
    RotinvSeries,
    Quadrature,
}

/// Values `h_k(ε̄)` for a contiguous range of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyRow {
    pub epsbar: Complex64,
    pub first: usize,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    /// The pole lies inside the (truncated) domain of the weight.
    pub inside_domain: bool,
}

/// One tabulated transform, the unit of CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRecord {
    pub n: usize,
    pub eps_re: f64,
    pub eps_im: f64,
    pub h_re: f64,
    pub h_im: f64,
    pub err_estimate: f64,
}

/// Evaluator of Cauchy transforms of the orthogonal polynomials of a weight.
#[derive(Debug, Clone)]
pub struct CauchyEvaluator {
    pub system: OrthoSystem,
    pub method: CauchyMethod,
    pub tolerance: f64,
}

impl CauchyEvaluator {
    /// Uses the closed form when the weight admits it, quadrature otherwise.
    pub fn new(system: &OrthoSystem) -> Self {
        let method = if supports_series(&system.weight) {
            CauchyMethod::RotinvSeries
        } else {
            CauchyMethod::Quadrature
        };
        CauchyEvaluator {
            system: system.clone(),
            method,
            tolerance: DEFAULT_CAUCHY_TOLERANCE,
        }
    }

    pub fn with_method(system: &OrthoSystem, method: CauchyMethod) -> Result<Self> {
        if method == CauchyMethod::RotinvSeries && !supports_series(&system.weight) {
            return Err(Error::InvalidWeight(
                "the series backend needs a built-in rotation-invariant weight".into(),
            ));
        }
        Ok(CauchyEvaluator {
            system: system.clone(),
            method,
            tolerance: DEFAULT_CAUCHY_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.system.weight
    }

    /// `h_n(ε̄)`.
    pub fn transform(&self, n: usize, epsbar: Complex64) -> Result<Complex64> {
        Ok(self.transforms(n..n + 1, epsbar)?.values[0])
    }

    /// `h_k(ε̄)` for every `k` in `range`.
    pub fn transforms(&self, range: std::ops::Range<usize>, epsbar: Complex64) -> Result<CauchyRow> {
        if let Some(last) = range.end.checked_sub(1) {
            self.system.require_degree(last)?;
        }
        if !(epsbar.re.is_finite() && epsbar.im.is_finite()) {
            return Err(Error::NonFinite("Cauchy transform argument"));
        }
        let degree = range.end;
        let inside = pole_placement(self.weight(), epsbar, degree) != PolePlacement::Outside;
        let (values, errors) = match self.method {
            CauchyMethod::RotinvSeries => {
                let values: Vec<Complex64> = range.clone().map(|k| rotinv_series(self.weight(), k, epsbar)).collect();
                let errors = values.iter().map(|v| 8.0 * f64::EPSILON * v.norm()).collect();
                (values, errors)
            }
            CauchyMethod::Quadrature => {
                let polys: Vec<&Poly> = range.clone().map(|k| self.system.polys[k].as_poly()).collect();
                quadrature_many(self.weight(), &polys, epsbar, self.tolerance)?
            }
        };
        Ok(CauchyRow {
            epsbar,
            first: range.start,
            values,
            errors,
            inside_domain: inside,
        })
    }

    pub fn records(&self, range: std::ops::Range<usize>, epsbar: Complex64) -> Result<Vec<CauchyRecord>> {
        let row = self.transforms(range, epsbar)?;
        Ok(row
            .values
            .iter()
            .zip(&row.errors)
            .enumerate()
            .map(|(i, (h, e))| CauchyRecord {
                n: row.first + i,
                eps_re: epsbar.re,
                eps_im: epsbar.im,
                h_re: h.re,
                h_im: h.im,
                err_estimate: *e,
            })
            .collect())
    }
}

fn supports_series(weight: &WeightSpec) -> bool {
    weight.strategy == MomentStrategy::ClosedForm
        && matches!(weight.family, Family::Gaussian { .. } | Family::DiskFlat { .. })
}

/// `h_n(ε̄)` in closed form for the built-in rotation-invariant weights.
fn rotinv_series(weight: &WeightSpec, n: usize, epsbar: Complex64) -> Complex64 {
    let rho2 = epsbar.norm_sqr();
    if rho2 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = (n + 1) as f64;
    // ∫_0^{|ε|} r^{2n+1} w(r) dr
    let radial = match weight.family {
        Family::Gaussian { scale } => {
            let s2 = scale * scale;
            let factorial: f64 = (1..=n).map(|i| i as f64).product();
            0.5 * s2.powi(n as i32 + 1) * factorial * gamma_lr(a, rho2 / s2)
        }
        Family::DiskFlat { radius } => {
            let r2 = rho2.min(radius * radius);
            r2.powi(n as i32 + 1) / (2.0 * a)
        }
        _ => unreachable!("series backend restricted to built-in weights"),
    };
    Complex64::new(0.0, weight.prefactor * radial) / epsbar.powu(n as u32 + 1)
}

/// Generic backend: `(1/2πi) ∫ dw p(z) /(z̄ − ε̄)` by singularity-aware
/// quadrature. Returns the value, an error estimate and whether the pole lies
/// inside the domain.
pub fn cauchy_quadrature(
    weight: &WeightSpec,
    poly: &Poly,
    epsbar: Complex64,
    tolerance: f64,
) -> Result<(Complex64, f64, bool)> {
    let degree = poly.degree().unwrap_or(0) + 1;
    let inside = pole_placement(weight, epsbar, degree) != PolePlacement::Outside;
    let (v, e) = quadrature_many(weight, &[poly], epsbar, tolerance)?;
    Ok((v[0], e[0], inside))
}

fn quadrature_many(
    weight: &WeightSpec,
    polys: &[&Poly],
    epsbar: Complex64,
    tolerance: f64,
) -> Result<(Vec<Complex64>, Vec<f64>)> {
    let degree = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0) + 1;
    let integral = adaptive(
        |res| pole_rule(weight, epsbar, res, degree),
        polys.len(),
        |z, out| {
            for (o, p) in out.iter_mut().zip(polys) {
                *o = p.eval(z);
            }
        },
        tolerance,
        "Cauchy transform",
    )?;
    let prefactor = Complex64::new(0.0, -1.0 / (2.0 * PI));
    Ok((
        integral.values.iter().map(|v| v * prefactor).collect(),
        integral.errors.iter().map(|e| e / (2.0 * PI)).collect(),
    ))
}

/// `h_n(ε̄)` through the evaluator.
pub fn cauchy_transform(ev: &CauchyEvaluator, n: usize, epsbar: Complex64) -> Result<Complex64> {
    ev.transform(n, epsbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weight::DomainSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk() -> OrthoSystem {
        OrthoSystem::for_weight(&WeightSpec::disk_flat(1.0).unwrap(), 6).unwrap()
    }

    fn gauss() -> OrthoSystem {
        OrthoSystem::for_weight(&WeightSpec::gaussian(), 6).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let ev = CauchyEvaluator::new(&disk());
        assert_eq!(ev.method, CauchyMethod::RotinvSeries);
        assert!((ev.transform(0, c(2.0, 0.0)).unwrap() - c(0.0, 0.25)).norm() < 1e-16);
        let ev = CauchyEvaluator::new(&gauss());
        let expected = c(0.0, 0.25 * (1.0 - (-4.0f64).exp()));
        assert!((ev.transform(0, c(2.0, 0.0)).unwrap() - expected).norm() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let sys = disk();
        let ev = CauchyEvaluator::with_method(&sys, CauchyMethod::Quadrature).unwrap();
        let v = ev.transform(0, c(2.0, 0.0)).unwrap();
        assert!((v - c(0.0, 0.25)).norm() < 1e-8 * 0.25);

        let sys = gauss();
        let ev = CauchyEvaluator::with_method(&sys, CauchyMethod::Quadrature).unwrap();
        // (i/2) γ(2, 9) / 3², γ(2, x) = 1 − (1 + x) e^{−x}
        let expected = c(0.0, 0.5 * (1.0 - 10.0 * (-9.0f64).exp()) / 9.0);
        let v = ev.transform(1, c(3.0, 0.0)).unwrap();
        assert!((v - expected).norm() < 1e-8 * expected.norm(), "{v} vs {expected}");
    }

    #[test]
    fn pole_inside_disk_is_finite_and_flagged() {
        let ev = CauchyEvaluator::with_method(&disk(), CauchyMethod::Quadrature).unwrap();
        let row = ev.transforms(0..3, c(0.3, 0.0)).unwrap();
        assert!(row.inside_domain);
        assert!(row.values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        let series = CauchyEvaluator::new(&disk()).transforms(0..3, c(0.3, 0.0)).unwrap();
        for (a, b) in row.values.iter().zip(&series.values) {
            assert!((a - b).norm() < 1e-8 * b.norm());
        }
    }

    #[test]
    fn large_argument_limit() {
        let sys = gauss();
        let ev = CauchyEvaluator::with_method(&sys, CauchyMethod::Quadrature).unwrap();
        for n in 0..3 {
            let eps = c(600.0, 800.0);
            let scaled = ev.transform(n, eps).unwrap() * eps.powu(n as u32 + 1);
            let limit = c(0.0, sys.norms[n] / (2.0 * PI));
            assert!((scaled - limit).norm() < 1e-5 * limit.norm(), "n={n}: {scaled}");
        }
    }

    #[test]
    fn measure_scaling_scales_transforms() {
        let w = WeightSpec::gaussian();
        let a = CauchyEvaluator::new(&OrthoSystem::for_weight(&w, 3).unwrap());
        let b = CauchyEvaluator::new(&OrthoSystem::for_weight(&w.scaled(3.0).unwrap(), 3).unwrap());
        for n in 0..=3 {
            let x = a.transform(n, c(1.1, -0.4)).unwrap();
            let y = b.transform(n, c(1.1, -0.4)).unwrap();
            assert!((3.0 * x - y).norm() < 1e-15 * y.norm());
        }
    }

    #[test]
    fn non_rotinv_weight_requires_quadrature() {
        let w = WeightSpec::custom(
            Family::EllipticGaussian { tau: 0.5 },
            DomainSpec::FullPlane { cutoff: Some(11.0) },
        )
        .unwrap();
        let sys = OrthoSystem::for_weight(&w, 3).unwrap();
        assert!(CauchyEvaluator::with_method(&sys, CauchyMethod::RotinvSeries).is_err());
        let ev = CauchyEvaluator::new(&sys);
        assert_eq!(ev.method, CauchyMethod::Quadrature);
        // real-symmetric weight: h_n(conj ε̄) = −conj(h_n(ε̄))
        let a = ev.transform(2, c(1.0, 0.7)).unwrap();
        let b = ev.transform(2, c(1.0, -0.7)).unwrap();
        assert!((a + b.conj()).norm() < 1e-9 * a.norm(), "{a} {b}");
    }

    #[test]
    fn depth_is_checked() {
        let ev = CauchyEvaluator::new(&disk());
        assert!(matches!(ev.transform(7, c(2.0, 0.0)), Err(Error::InsufficientDepth { .. })));
    }
}

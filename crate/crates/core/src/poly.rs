//! Dense polynomials in one complex variable.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A polynomial with complex coefficients in ascending powers.
///
/// The zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Exact coefficient-wise derivative of the given order.
    pub fn derivative(&self, order: usize) -> Poly {
        if order == 0 {
            return self.clone();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(order)
            .map(|(k, c)| c * falling_factorial(k, order))
            .collect();
        Poly::new(coeffs)
    }

    /// Polynomial long division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[dd];
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Complex64::new(0.0, 0.0); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (i, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + i] -= q * dc;
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `∏ (z − root)` for the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Poly {
        roots.iter().fold(Poly::constant(Complex64::new(1.0, 0.0)), |p, r| {
            p.mul(&Poly::new(vec![-r, Complex64::new(1.0, 0.0)]))
        })
    }

    pub fn scale(&self, factor: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

/// `k (k−1) ⋯ (k−order+1)`.
fn falling_factorial(k: usize, order: usize) -> f64 {
    (0..order).map(|i| (k - i) as f64).product()
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})z"),
                _ => format!("({c})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// A monic polynomial `z^d + …`; the leading coefficient is exactly one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Poly", into = "Poly")]
pub struct MonicPoly(Poly);

impl MonicPoly {
    /// Wraps coefficients whose leading entry is exactly one.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Poly::new(coeffs).try_into()
    }

    /// Builds `z^d + lower[d−1] z^{d−1} + … + lower[0]`.
    pub fn from_lower(mut lower: Vec<Complex64>) -> Self {
        lower.push(Complex64::new(1.0, 0.0));
        MonicPoly(Poly { coeffs: lower })
    }

    /// Normalizes `p` by its leading coefficient.
    pub fn normalized(p: &Poly) -> Result<Self> {
        let d = p
            .degree()
            .ok_or_else(|| Error::Constraint("cannot normalize the zero polynomial".into()))?;
        let lead = p.coeffs[d];
        let mut coeffs: Vec<Complex64> = p.coeffs.iter().map(|c| c / lead).collect();
        coeffs[d] = Complex64::new(1.0, 0.0);
        Ok(MonicPoly(Poly { coeffs }))
    }

    pub fn monomial(degree: usize) -> Self {
        MonicPoly::from_lower(vec![Complex64::new(0.0, 0.0); degree])
    }

    pub fn degree(&self) -> usize {
        self.0.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.eval(z)
    }

    pub fn derivative(&self, order: usize) -> Poly {
        self.0.derivative(order)
    }

    pub fn as_poly(&self) -> &Poly {
        &self.0
    }
}

impl TryFrom<Poly> for MonicPoly {
    type Error = Error;

    fn try_from(p: Poly) -> Result<Self> {
        match p.coeffs.last() {
            Some(c) if *c == Complex64::new(1.0, 0.0) => Ok(MonicPoly(p)),
            _ => Err(Error::Constraint("polynomial is not monic".into())),
        }
    }
}

impl From<MonicPoly> for Poly {
    fn from(p: MonicPoly) -> Poly {
        p.0
    }
}

/// Evaluates a monic polynomial at `z`.
pub fn eval_poly(p: &MonicPoly, z: Complex64) -> Complex64 {
    p.eval(z)
}

/// Exact derivative of the given order (the zero polynomial when the order
/// exceeds the degree).
pub fn poly_derivative(p: &MonicPoly, order: usize) -> Poly {
    p.derivative(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn horner_examples() {
        let z2 = MonicPoly::monomial(2);
        assert_eq!(eval_poly(&z2, c(1.0, 1.0)), c(0.0, 2.0));
        assert_eq!(eval_poly(&MonicPoly::monomial(3), c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn monic_leading_behaviour_dominates() {
        let p = MonicPoly::from_lower(vec![c(3.0, -1.0), c(0.5, 2.0), c(-7.0, 0.0)]);
        let z = c(1e6, 0.0);
        let ratio = p.eval(z) / z.powu(3);
        assert!((ratio - c(1.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn derivatives() {
        let z2 = MonicPoly::monomial(2);
        assert_eq!(poly_derivative(&z2, 1), Poly::new(vec![c(0.0, 0.0), c(2.0, 0.0)]));
        assert_eq!(poly_derivative(&z2, 0), z2.as_poly().clone());
        assert!(poly_derivative(&z2, 3).is_zero());
        let p = MonicPoly::from_lower(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(p.derivative(2), Poly::new(vec![c(6.0, 0.0), c(6.0, 0.0)]));
    }

    #[test]
    fn division_by_linear_factor() {
        let p = Poly::from_roots(&[c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let (q, r) = p.div_rem(&Poly::from_roots(&[c(0.0, 2.0)]));
        assert!(r.coeffs().iter().all(|x| x.norm() < 1e-14));
        let expected = Poly::from_roots(&[c(1.0, 0.0), c(-1.0, 1.0)]);
        for (a, b) in q.coeffs().iter().zip(expected.coeffs()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn monic_rejects_non_monic() {
        assert!(MonicPoly::new(vec![c(1.0, 0.0), c(2.0, 0.0)]).is_err());
        let json = serde_json::to_string(&MonicPoly::monomial(1)).unwrap();
        let back: MonicPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, MonicPoly::monomial(1));
        assert!(serde_json::from_str::<MonicPoly>("{\"coeffs\":[[0.0,0.0],[2.0,0.0]]}").is_err());
    }
}

//! Monic orthogonal polynomials `π_k` in the complex plane,
//! `∫ π_k conj(π_j) dw = δ_kj r_k`, built from the moment matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{invert_unit_lower, ldl_hermitian, log_determinant, Rows};
pub use crate::poly::{eval_poly, poly_derivative, MonicPoly, Poly};
use crate::quadrature::{adaptive, smooth_rule};
use crate::weight::{moment_matrix, MomentMatrix, WeightSpec};

/// Moment matrices whose diagonally scaled pivot spread exceeds this are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Orthogonal polynomials `π_0 … π_n` with their squared norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthoSystem {
    pub weight: WeightSpec,
    pub max_degree: usize,
    pub polys: Vec<MonicPoly>,
    pub norms: Vec<f64>,
}

impl OrthoSystem {
    /// Computes moments of `weight` up to degree `max_degree` and builds the
    /// system from them.
    pub fn for_weight(weight: &WeightSpec, max_degree: usize) -> Result<Self> {
        let m = moment_matrix(weight, max_degree)?;
        build_ortho_system(&m, weight)
    }

    pub fn poly(&self, k: usize) -> Result<&MonicPoly> {
        self.polys.get(k).ok_or(Error::InsufficientDepth {
            required: k,
            available: self.max_degree,
        })
    }

    pub fn norm(&self, k: usize) -> Result<f64> {
        self.norms.get(k).copied().ok_or(Error::InsufficientDepth {
            required: k,
            available: self.max_degree,
        })
    }

    pub fn require_degree(&self, degree: usize) -> Result<()> {
        if degree > self.max_degree {
            return Err(Error::InsufficientDepth {
                required: degree,
                available: self.max_degree,
            });
        }
        Ok(())
    }

    /// `π_k(z)` for `k` in `range`.
    pub fn eval_range(&self, range: std::ops::Range<usize>, z: Complex64) -> Result<Vec<Complex64>> {
        if let Some(last) = range.end.checked_sub(1) {
            self.require_degree(last)?;
        }
        Ok(range.map(|k| self.polys[k].eval(z)).collect())
    }

    /// `π_k^{(order)}(z)` for `k` in `range`.
    pub fn eval_derivative_range(
        &self,
        range: std::ops::Range<usize>,
        order: usize,
        z: Complex64,
    ) -> Result<Vec<Complex64>> {
        if order == 0 {
            return self.eval_range(range, z);
        }
        if let Some(last) = range.end.checked_sub(1) {
            self.require_degree(last)?;
        }
        Ok(range.map(|k| self.polys[k].derivative(order).eval(z)).collect())
    }

    /// Gram matrix `∫ π_k conj(π_j) dw / sqrt(r_k r_j)` by planar quadrature,
    /// with the identity subtracted.
    pub fn orthogonality_residuals(&self) -> Result<Rows> {
        let dim = self.max_degree + 1;
        let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| (j..dim).map(move |k| (j, k))).collect();
        let integral = adaptive(
            |res| smooth_rule(&self.weight, res, 2 * self.max_degree),
            pairs.len(),
            |z, out| {
                let vals: Vec<Complex64> = self.polys.iter().map(|p| p.eval(z)).collect();
                for (o, &(j, k)) in out.iter_mut().zip(&pairs) {
                    *o = vals[k] * vals[j].conj();
                }
            },
            self.weight.tolerance,
            "orthogonality residuals",
        )?;
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![vec![zero; dim]; dim];
        for (&(j, k), v) in pairs.iter().zip(integral.values) {
            let scaled = v / (self.norms[j] * self.norms[k]).sqrt();
            let delta = if j == k { 1.0 } else { 0.0 };
            out[k][j] = scaled - delta;
            out[j][k] = (scaled - delta).conj();
        }
        Ok(out)
    }
}

/// Builds `π_0 … π_n` from the Hermitian factorization `M = L D Lᴴ` of the
/// moment matrix: the coefficients of `π_k` are row `k` of `L⁻¹` and
/// `r_k = D_k`.
pub fn build_ortho_system(m: &MomentMatrix, weight: &WeightSpec) -> Result<OrthoSystem> {
    let indicator = condition_indicator(m)?;
    if indicator > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            indicator,
            limit: CONDITION_LIMIT,
        });
    }
    let (l, d) = ldl_hermitian(&m.entries)?;
    let inv = invert_unit_lower(&l);
    let polys = inv
        .iter()
        .enumerate()
        .map(|(k, row)| MonicPoly::from_lower(row[..k].to_vec()))
        .collect();
    Ok(OrthoSystem {
        weight: weight.clone(),
        max_degree: m.order,
        polys,
        norms: d,
    })
}

/// Spread of the LDLᴴ pivots of the diagonally equilibrated moment matrix.
pub fn condition_indicator(m: &MomentMatrix) -> Result<f64> {
    let s: Vec<f64> = (0..m.dim()).map(|j| m.get(j, j).re.sqrt()).collect();
    let scaled: Rows = m
        .entries
        .iter()
        .enumerate()
        .map(|(j, row)| row.iter().enumerate().map(|(k, v)| v / (s[j] * s[k])).collect())
        .collect();
    let (_, d) = ldl_hermitian(&scaled)?;
    let max = d.iter().cloned().fold(0.0, f64::max);
    let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(max / min)
}

/// Independent construction from bordered determinants of moment minors:
/// `π_n(z) ∝ det[[M_{0k} … M_{nk}]_{k<n}; [1, z, …, zⁿ]]` and
/// `r_n = det M_{≤n} / det M_{<n}`.
pub fn build_ortho_system_bordered(m: &MomentMatrix, weight: &WeightSpec) -> Result<OrthoSystem> {
    let mut polys = Vec::with_capacity(m.dim());
    let mut norms = Vec::with_capacity(m.dim());
    for n in 0..m.dim() {
        let minor = log_determinant(m.leading(n));
        let full = log_determinant(m.leading(n + 1));
        if full.is_zero() || minor.is_zero() {
            return Err(Error::NotPositiveDefinite { minor: n, pivot: 0.0 });
        }
        // coefficient of z^i is the cofactor of the last row, column i
        let mut lower = Vec::with_capacity(n);
        for i in 0..n {
            let rows: Rows = (0..n)
                .map(|k| (0..=n).filter(|&c| c != i).map(|c| m.get(c, k)).collect())
                .collect();
            let sign = if (n + i) % 2 == 0 { 1.0 } else { -1.0 };
            lower.push(log_determinant(rows).ratio(&minor) * sign);
        }
        polys.push(MonicPoly::from_lower(lower));
        norms.push(full.ratio(&minor).re);
    }
    Ok(OrthoSystem {
        weight: weight.clone(),
        max_degree: m.order,
        polys,
        norms,
    })
}

/// `Z_N = N! ∏_{j<N} r_j`.
pub fn partition_function(sys: &OrthoSystem, n: usize) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    sys.require_degree(n - 1)?;
    Ok((0..n).map(|j| (j + 1) as f64 * sys.norms[j]).product())
}

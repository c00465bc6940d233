//! Small dense complex linear algebra: LU determinants in log-polar form,
//! linear solves and the Hermitian LDLᴴ factorization of moment matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense square matrix stored as a list of rows.
pub type Rows = Vec<Vec<Complex64>>;

/// A determinant held as `phase · exp(log_abs)`, so that products of large
/// factorial-sized rows never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    /// Unit-modulus phase, or zero for a singular matrix.
    pub phase: Complex64,
    /// Ratio of the largest to the smallest pivot modulus after row
    /// equilibration; infinite for a singular matrix.
    pub pivot_ratio: f64,
}

impl LogDet {
    pub fn one() -> Self {
        LogDet {
            log_abs: 0.0,
            phase: Complex64::new(1.0, 0.0),
            pivot_ratio: 1.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phase == Complex64::new(0.0, 0.0) || self.log_abs == f64::NEG_INFINITY
    }

    pub fn value(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase * self.log_abs.exp()
    }

    /// `self / other`, in log-polar form. `other` must be non-zero.
    pub fn ratio(&self, other: &LogDet) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.phase / other.phase * (self.log_abs - other.log_abs).exp()
    }
}

/// Determinant of a square matrix by LU with partial pivoting.
///
/// Each row is first divided by its largest modulus; the scales are
/// accumulated in the logarithm.
pub fn log_determinant(mut rows: Rows) -> LogDet {
    let n = rows.len();
    if n == 0 {
        return LogDet::one();
    }
    debug_assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");

    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for row in rows.iter_mut() {
        let scale = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return singular();
        }
        for x in row.iter_mut() {
            *x /= scale;
        }
        log_abs += scale.ln();
    }

    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (p, pmag) = (col..n)
            .map(|r| (r, rows[r][col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmag == 0.0 {
            return singular();
        }
        if p != col {
            rows.swap(p, col);
            phase = -phase;
        }
        let pivot = rows[col][col];
        max_pivot = max_pivot.max(pmag);
        min_pivot = min_pivot.min(pmag);
        log_abs += pmag.ln();
        phase *= pivot / pmag;
        for r in col + 1..n {
            let factor = rows[r][col] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (upper, lower) = rows.split_at_mut(r);
            let src = &upper[col];
            for (dst, s) in lower[0][col..].iter_mut().zip(&src[col..]) {
                *dst -= factor * s;
            }
        }
    }
    // re-normalize the accumulated phase against rounding drift
    phase /= phase.norm();
    LogDet {
        log_abs,
        phase,
        pivot_ratio: max_pivot / min_pivot,
    }
}

fn singular() -> LogDet {
    LogDet {
        log_abs: f64::NEG_INFINITY,
        phase: Complex64::new(0.0, 0.0),
        pivot_ratio: f64::INFINITY,
    }
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(mut a: Rows, mut b: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let n = a.len();
    assert_eq!(b.len(), n, "right-hand side length must match");
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x.norm())
        .fold(0.0, f64::max);
    let mut max_pivot: f64 = 0.0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (p, pmag) = (col..n)
            .map(|r| (r, a[r][col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmag <= scale * 1e-15 {
            return Err(Error::SingularDeterminant {
                what: "linear system",
                conditioning: f64::INFINITY,
            });
        }
        a.swap(p, col);
        b.swap(p, col);
        max_pivot = max_pivot.max(pmag);
        min_pivot = min_pivot.min(pmag);
        for r in col + 1..n {
            let factor = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= factor * v;
            }
            let v = b[col];
            b[r] -= factor * v;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Ok(x)
}

/// Hermitian factorization `m = L D Lᴴ` with `L` unit lower triangular and
/// `D` real positive.
///
/// Fails with the (zero-based) index of the first leading minor whose pivot is
/// not strictly positive relative to its diagonal entry.
pub fn ldl_hermitian(m: &Rows) -> Result<(Rows, Vec<f64>)> {
    let n = m.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut l = vec![vec![zero; n]; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let mut dj = m[j][j].re;
        for k in 0..j {
            dj -= l[j][k].norm_sqr() * d[k];
        }
        if !(dj > m[j][j].re.abs() * 1e-13) || !dj.is_finite() {
            return Err(Error::NotPositiveDefinite { minor: j, pivot: dj });
        }
        d[j] = dj;
        l[j][j] = Complex64::new(1.0, 0.0);
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj() * d[k];
            }
            l[i][j] = s / dj;
        }
    }
    Ok((l, d))
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
pub fn invert_unit_lower(l: &Rows) -> Rows {
    let n = l.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut inv = vec![vec![zero; n]; n];
    for i in 0..n {
        inv[i][i] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let s: Complex64 = (j..i).map(|k| l[i][k] * inv[k][j]).sum();
            inv[i][j] = -s;
        }
    }
    inv
}

//! Planar weight functions, their domains, and monomial moments
//! `M_jk = ∫_D z^j z̄^k w(z, z̄) dA` with `dA` the Lebesgue area element.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::linalg::{ldl_hermitian, Rows};
use crate::quadrature::{adaptive, smooth_rule, Resolution};

pub const DEFAULT_MOMENT_TOLERANCE: f64 = 1e-10;

/// Relative size of the neglected tail of a full-plane weight.
const TAIL_TOLERANCE: f64 = 1e-17;

/// Integration domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    /// Disk of the given radius centered at the origin.
    Disk { radius: f64 },
    /// The whole plane; quadrature truncates at `cutoff` when one is given,
    /// otherwise at a radius derived from the weight's decay.
    FullPlane { cutoff: Option<f64> },
}

/// Closed families of weights. Built-in weights use closed-form moments;
/// the same families declared as custom go through quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `exp(−|z|²/scale²)` on the full plane.
    Gaussian { scale: f64 },
    /// `1` on the disk `|z| ≤ radius`.
    DiskFlat { radius: f64 },
    /// Elliptic Ginibre weight
    /// `exp(−(|z|² − τ Re z²)/(1 − τ²))`, `0 ≤ τ < 1`.
    EllipticGaussian { tau: f64 },
    /// `exp(−|z − center|²/scale²)`.
    ShiftedGaussian { center: Complex64, scale: f64 },
}

/// How moments are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentStrategy {
    ClosedForm,
    Quadrature,
}

/// User-facing classification of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Gaussian,
    DiskFlat,
    Custom,
}

/// A strictly positive weight `prefactor · family(z)` on a domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub family: Family,
    pub domain: DomainSpec,
    pub strategy: MomentStrategy,
    pub prefactor: f64,
    pub tolerance: f64,
}

impl WeightSpec {
    /// The Ginibre weight `exp(−|z|²)`.
    pub fn gaussian() -> Self {
        Self::gaussian_with_scale(1.0).expect("unit scale is valid")
    }

    pub fn gaussian_with_scale(scale: f64) -> Result<Self> {
        let w = WeightSpec {
            family: Family::Gaussian { scale },
            domain: DomainSpec::FullPlane { cutoff: None },
            strategy: MomentStrategy::ClosedForm,
            prefactor: 1.0,
            tolerance: DEFAULT_MOMENT_TOLERANCE,
        };
        w.validate()?;
        Ok(w)
    }

    /// The flat weight on the disk of the given radius.
    pub fn disk_flat(radius: f64) -> Result<Self> {
        let w = WeightSpec {
            family: Family::DiskFlat { radius },
            domain: DomainSpec::Disk { radius },
            strategy: MomentStrategy::ClosedForm,
            prefactor: 1.0,
            tolerance: DEFAULT_MOMENT_TOLERANCE,
        };
        w.validate()?;
        Ok(w)
    }

    /// A family evaluated purely by quadrature on a declared domain.
    /// Full-plane custom weights must declare their cutoff radius.
    pub fn custom(family: Family, domain: DomainSpec) -> Result<Self> {
        let w = WeightSpec {
            family,
            domain,
            strategy: MomentStrategy::Quadrature,
            prefactor: 1.0,
            tolerance: DEFAULT_MOMENT_TOLERANCE,
        };
        w.validate()?;
        Ok(w)
    }

    /// The same weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut w = self.clone();
        w.prefactor *= factor;
        w.validate()?;
        Ok(w)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        self.tolerance = tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn kind(&self) -> WeightKind {
        match (self.strategy, self.family) {
            (MomentStrategy::ClosedForm, Family::Gaussian { .. }) => WeightKind::Gaussian,
            (MomentStrategy::ClosedForm, Family::DiskFlat { .. }) => WeightKind::DiskFlat,
            _ => WeightKind::Custom,
        }
    }

    /// Rotation invariance around the origin, which makes the orthogonal
    /// polynomials monomials.
    pub fn is_rotation_invariant(&self) -> bool {
        match self.family {
            Family::Gaussian { .. } | Family::DiskFlat { .. } => true,
            Family::EllipticGaussian { tau } => tau == 0.0,
            Family::ShiftedGaussian { center, .. } => center == Complex64::new(0.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidWeight(msg));
        if !(self.prefactor > 0.0 && self.prefactor.is_finite()) {
            return bad(format!("prefactor must be positive, got {}", self.prefactor));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return bad(format!("moment tolerance must lie in (0, 1), got {}", self.tolerance));
        }
        match (self.family, self.domain) {
            (Family::DiskFlat { radius }, DomainSpec::Disk { radius: d }) => {
                if !(radius > 0.0 && radius.is_finite()) {
                    return bad(format!("disk radius must be positive, got {radius}"));
                }
                if radius != d {
                    return bad(format!("disk-flat radius {radius} differs from domain radius {d}"));
                }
            }
            (Family::DiskFlat { .. }, DomainSpec::FullPlane { .. }) => {
                return bad("disk-flat weight requires a disk domain".into())
            }
            (_, DomainSpec::Disk { .. }) => {
                return bad("gaussian-type weights are defined on the full plane".into())
            }
            (family, DomainSpec::FullPlane { cutoff }) => {
                match family {
                    Family::Gaussian { scale } | Family::ShiftedGaussian { scale, .. } => {
                        if !(scale > 0.0 && scale.is_finite()) {
                            return bad(format!("gaussian scale must be positive, got {scale}"));
                        }
                    }
                    Family::EllipticGaussian { tau } => {
                        if !(0.0..1.0).contains(&tau) {
                            return bad(format!("elliptic parameter must lie in [0, 1), got {tau}"));
                        }
                    }
                    Family::DiskFlat { .. } => unreachable!(),
                }
                match cutoff {
                    Some(c) if !(c > 0.0 && c.is_finite()) => {
                        return bad(format!("cutoff must be positive, got {c}"))
                    }
                    None if self.strategy == MomentStrategy::Quadrature => {
                        return bad("custom full-plane weights must declare a cutoff radius".into())
                    }
                    _ => {}
                }
            }
        }
        // positivity, sampled on a coarse grid of the truncated domain
        let rule = smooth_rule(self, Resolution::new(12, 12), 0);
        if let Some(z) = rule.nodes.iter().find(|z| {
            let v = self.eval(**z);
            !(v > 0.0 && v.is_finite())
        }) {
            return bad(format!("weight is not strictly positive at {z}"));
        }
        Ok(())
    }

    /// Weight value without the domain check.
    pub fn eval(&self, z: Complex64) -> f64 {
        let shape = match self.family {
            Family::Gaussian { scale } => (-z.norm_sqr() / (scale * scale)).exp(),
            Family::DiskFlat { .. } => 1.0,
            Family::EllipticGaussian { tau } => {
                let (x, y) = (z.re, z.im);
                (-(x * x / (1.0 + tau) + y * y / (1.0 - tau))).exp()
            }
            Family::ShiftedGaussian { center, scale } => {
                (-(z - center).norm_sqr() / (scale * scale)).exp()
            }
        };
        self.prefactor * shape
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match self.domain {
            DomainSpec::Disk { radius } => z.norm() <= radius,
            DomainSpec::FullPlane { .. } => true,
        }
    }

    /// Characteristic length of the weight.
    pub fn length_scale(&self) -> f64 {
        match self.family {
            Family::Gaussian { scale } | Family::ShiftedGaussian { scale, .. } => scale,
            Family::DiskFlat { radius } => radius,
            Family::EllipticGaussian { tau } => (1.0 + tau).sqrt(),
        }
    }

    /// Radius of the region holding the eigenvalues of an `n`-point ensemble:
    /// the disk itself, or the √n-scaled droplet of the gaussian families.
    pub fn support_radius(&self, n: usize) -> f64 {
        let droplet = (n.max(1) as f64).sqrt();
        match self.family {
            Family::DiskFlat { radius } => radius,
            Family::Gaussian { scale } => scale * droplet,
            Family::EllipticGaussian { tau } => (1.0 + tau) * droplet,
            Family::ShiftedGaussian { center, scale } => center.norm() + scale * droplet,
        }
    }

    /// Radius beyond which quadrature ignores the weight, for integrands that
    /// grow like `|z|^degree`.
    pub fn truncation_radius(&self, degree: usize) -> f64 {
        match self.domain {
            DomainSpec::Disk { radius } => radius,
            DomainSpec::FullPlane { cutoff: Some(c) } => c,
            DomainSpec::FullPlane { cutoff: None } => match self.family {
                Family::Gaussian { scale } => scale * gaussian_tail_radius(degree),
                Family::ShiftedGaussian { center, scale } => {
                    center.norm() + scale * gaussian_tail_radius(degree)
                }
                Family::EllipticGaussian { tau } => (1.0 + tau).sqrt() * gaussian_tail_radius(degree),
                Family::DiskFlat { radius } => radius,
            },
        }
    }

    /// Draws a point from the normalized weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self.family {
            Family::Gaussian { scale } => {
                let r = scale * (-(1.0 - rng.random::<f64>()).ln()).sqrt();
                Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
            }
            Family::DiskFlat { radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
            }
            Family::EllipticGaussian { tau } => {
                let x: f64 = StandardNormal.sample(rng);
                let y: f64 = StandardNormal.sample(rng);
                Complex64::new(x * ((1.0 + tau) / 2.0).sqrt(), y * ((1.0 - tau) / 2.0).sqrt())
            }
            Family::ShiftedGaussian { center, scale } => {
                let x: f64 = StandardNormal.sample(rng);
                let y: f64 = StandardNormal.sample(rng);
                center + Complex64::new(x, y) * (scale / 2f64.sqrt())
            }
        }
    }
}

/// Smallest `R` (in units of the gaussian scale) with
/// `∫_R^∞ r^{degree+1} e^{−r²} dr` below `TAIL_TOLERANCE` of the full integral.
fn gaussian_tail_radius(degree: usize) -> f64 {
    let a = 0.5 * degree as f64 + 1.0;
    let mut r: f64 = 4.0;
    while gamma_ur(a, r * r) > TAIL_TOLERANCE {
        r += 0.25;
    }
    r
}

/// Evaluates the weight at `z`, rejecting points outside the domain.
pub fn eval_weight(spec: &WeightSpec, z: Complex64) -> Result<f64> {
    if !spec.contains(z) {
        return Err(Error::OutsideDomain { re: z.re, im: z.im });
    }
    Ok(spec.eval(z))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn closed_form_moment(spec: &WeightSpec, j: usize, k: usize) -> Option<Complex64> {
    if spec.strategy != MomentStrategy::ClosedForm {
        return None;
    }
    if j != k {
        return Some(Complex64::new(0.0, 0.0));
    }
    let value = match spec.family {
        Family::Gaussian { scale } => PI * scale.powi(2 * k as i32 + 2) * factorial(k),
        Family::DiskFlat { radius } => PI * radius.powi(2 * k as i32 + 2) / (k + 1) as f64,
        _ => return None,
    };
    Some(Complex64::new(spec.prefactor * value, 0.0))
}

/// `M_jk = ∫ z^j z̄^k dw`.
pub fn moment(spec: &WeightSpec, j: usize, k: usize) -> Result<Complex64> {
    if let Some(m) = closed_form_moment(spec, j, k) {
        return Ok(m);
    }
    let integral = adaptive(
        |res| smooth_rule(spec, res, j + k),
        1,
        |z, out| out[0] = z.powu(j as u32) * z.conj().powu(k as u32),
        spec.tolerance,
        "moment",
    )?;
    Ok(integral.values[0])
}

/// Hermitian positive-definite matrix of monomial moments up to `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub order: usize,
    pub entries: Rows,
}

impl MomentMatrix {
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j][k]
    }

    pub fn dim(&self) -> usize {
        self.order + 1
    }

    /// Leading principal `(size × size)` block.
    pub fn leading(&self, size: usize) -> Rows {
        self.entries[..size].iter().map(|r| r[..size].to_vec()).collect()
    }
}

/// Assembles `M_jk` for `0 ≤ j, k ≤ n`: the upper triangle is computed and
/// mirrored by conjugation, and positive definiteness is checked.
pub fn moment_matrix(spec: &WeightSpec, n: usize) -> Result<MomentMatrix> {
    let dim = n + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = vec![vec![zero; dim]; dim];
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|j| (j..dim).map(move |k| (j, k))).collect();

    let upper: Vec<Complex64> = if spec.strategy == MomentStrategy::ClosedForm {
        pairs
            .iter()
            .map(|&(j, k)| closed_form_moment(spec, j, k).expect("closed form available"))
            .collect()
    } else {
        let integral = adaptive(
            |res| smooth_rule(spec, res, 2 * n),
            pairs.len(),
            |z, out| {
                let zb = z.conj();
                let mut zp = vec![Complex64::new(1.0, 0.0); dim];
                let mut zbp = vec![Complex64::new(1.0, 0.0); dim];
                for i in 1..dim {
                    zp[i] = zp[i - 1] * z;
                    zbp[i] = zbp[i - 1] * zb;
                }
                for (o, &(j, k)) in out.iter_mut().zip(&pairs) {
                    *o = zp[j] * zbp[k];
                }
            },
            spec.tolerance,
            "moment matrix",
        )?;
        integral.values
    };

    for (&(j, k), v) in pairs.iter().zip(upper) {
        if j == k {
            entries[j][j] = Complex64::new(v.re, 0.0);
        } else {
            entries[j][k] = v;
            entries[k][j] = v.conj();
        }
    }
    ldl_hermitian(&entries)?;
    Ok(MomentMatrix { order: n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn custom_gaussian() -> WeightSpec {
        WeightSpec::custom(
            Family::Gaussian { scale: 1.0 },
            DomainSpec::FullPlane { cutoff: Some(9.0) },
        )
        .unwrap()
    }

    fn custom_disk() -> WeightSpec {
        WeightSpec::custom(Family::DiskFlat { radius: 1.0 }, DomainSpec::Disk { radius: 1.0 }).unwrap()
    }

    #[test]
    fn weight_values() {
        assert_eq!(eval_weight(&WeightSpec::gaussian(), c(0.0, 0.0)).unwrap(), 1.0);
        let disk = WeightSpec::disk_flat(1.0).unwrap();
        assert_eq!(eval_weight(&disk, c(0.5, 0.0)).unwrap(), 1.0);
        assert!(matches!(
            eval_weight(&disk, c(2.0, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn closed_form_moments() {
        let g = WeightSpec::gaussian();
        assert!((moment(&g, 2, 2).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-14);
        assert_eq!(moment(&g, 1, 2).unwrap(), c(0.0, 0.0));
        let d = WeightSpec::disk_flat(1.0).unwrap();
        assert!((moment(&d, 0, 0).unwrap() - c(PI, 0.0)).norm() < 1e-15);
        for k in 0..6 {
            let expected = PI / (k + 1) as f64;
            assert!((moment(&d, k, k).unwrap().re - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_moments_match_closed_forms() {
        // radial oracle: 2π ∫ r^{2k+1} e^{-r²} dr = π k!
        let g = custom_gaussian();
        assert!((moment(&g, 2, 2).unwrap() - c(2.0 * PI, 0.0)).norm() < 1e-10 * 2.0 * PI);
        assert!(moment(&g, 1, 2).unwrap().norm() < 1e-12);
        let d = custom_disk();
        for k in 0..5 {
            let expected = PI / (k + 1) as f64;
            assert!((moment(&d, k, k).unwrap().re - expected).abs() < 1e-12 * expected);
        }
    }

    #[test]
    fn moment_matrix_examples() {
        let g = moment_matrix(&WeightSpec::gaussian(), 2).unwrap();
        let diag = [PI, PI, 2.0 * PI];
        for j in 0..3 {
            for k in 0..3 {
                let expected = if j == k { diag[j] } else { 0.0 };
                assert!((g.get(j, k) - c(expected, 0.0)).norm() < 1e-13);
            }
        }
        let d = moment_matrix(&WeightSpec::disk_flat(1.0).unwrap(), 1).unwrap();
        assert!((d.get(1, 1).re - PI / 2.0).abs() < 1e-15);

        let q = moment_matrix(&custom_gaussian(), 2).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                assert!((q.get(j, k) - g.get(j, k)).norm() < 1e-10 * PI);
            }
        }
    }

    #[test]
    fn elliptic_moments_are_hermitian_and_real() {
        let w = WeightSpec::custom(
            Family::EllipticGaussian { tau: 0.4 },
            DomainSpec::FullPlane { cutoff: Some(12.0) },
        )
        .unwrap();
        let m = moment_matrix(&w, 4).unwrap();
        // mass: π sqrt((1+τ)(1−τ))
        assert!((m.get(0, 0).re - PI * (1.0f64 - 0.16).sqrt()).abs() < 1e-10);
        // ∫ z² dw = τ ∫ dw ⋅ ... is real and positive, ∫ z dw = 0
        assert!(m.get(1, 0).norm() < 1e-12);
        assert!(m.get(2, 0).im.abs() < 1e-12 && m.get(2, 0).re > 0.0);
        for j in 0..5 {
            for k in 0..5 {
                assert_eq!(m.get(j, k), m.get(k, j).conj());
            }
        }
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(WeightSpec::disk_flat(-1.0).is_err());
        assert!(WeightSpec::gaussian().scaled(0.0).is_err());
        assert!(WeightSpec::custom(Family::Gaussian { scale: 1.0 }, DomainSpec::FullPlane { cutoff: None }).is_err());
        assert!(WeightSpec::custom(Family::EllipticGaussian { tau: 1.0 }, DomainSpec::FullPlane { cutoff: Some(5.0) }).is_err());
        assert!(WeightSpec::custom(Family::DiskFlat { radius: 1.0 }, DomainSpec::Disk { radius: 2.0 }).is_err());
    }

    #[test]
    fn truncation_radius_grows_with_degree() {
        let g = WeightSpec::gaussian();
        let r0 = g.truncation_radius(0);
        let r16 = g.truncation_radius(16);
        assert!(r0 >= 6.0 && r16 > r0 && r16 < 10.0, "{r0} {r16}");
    }
}

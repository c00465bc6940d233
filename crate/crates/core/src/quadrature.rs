//! Planar quadrature on polar tensor grids.
//!
//! Two kinds of rule are built for a weight `w`:
//!
//! * a *smooth* rule, `Σ c_q f(z_q) ≈ ∫_D w f dA`, Gauss–Legendre in the
//!   radius and the trapezoid rule in the angle around the origin;
//! * a *pole* rule, `Σ c_q f(z_q) ≈ ∫_D w f /(z̄ − ε̄) dA`, for smooth `f`.
//!   When the pole lies inside the (truncated) domain the polar grid is
//!   centered on the pole: with `z = ε + ρ e^{iφ}` the kernel becomes
//!   `dA /(z̄ − ε̄) = e^{iφ} dρ dφ`, so the integrand is smooth in `(ρ, φ)`.
//!   Otherwise the smooth rule is reused with the kernel folded into the
//!   quadrature weights.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weight::{DomainSpec, WeightSpec};

/// Node counts of a polar grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub radial: usize,
    pub angular: usize,
}

impl Resolution {
    pub const fn new(radial: usize, angular: usize) -> Self {
        Resolution { radial, angular }
    }

    pub fn doubled(self) -> Self {
        Resolution::new(2 * self.radial, 2 * self.angular)
    }
}

pub const START_RESOLUTION: Resolution = Resolution::new(32, 32);
pub const MAX_RESOLUTION: Resolution = Resolution::new(1024, 2048);

type NodeWeights = Arc<Vec<(f64, f64)>>;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, cached per order.
pub fn gauss_legendre(order: usize) -> NodeWeights {
    static CACHE: OnceLock<Mutex<HashMap<usize, NodeWeights>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return rule.clone();
    }
    let rule = Arc::new(
        GaussLegendre::new(order.max(2))
            .expect("order >= 2")
            .as_node_weight_pairs()
            .to_vec(),
    );
    cache.lock().unwrap().insert(order, rule.clone());
    rule
}

/// A list of planar nodes with complex quadrature weights.
#[derive(Debug, Clone, Default)]
pub struct PlanarRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

impl PlanarRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, z: Complex64, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            self.nodes.push(z);
            self.weights.push(c);
        }
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(mut self, factor: Complex64) -> Self {
        for c in &mut self.weights {
            *c *= factor;
        }
        self
    }

    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(Complex64) -> Complex64 + Sync,
    {
        self.nodes
            .par_iter()
            .zip(&self.weights)
            .map(|(z, c)| c * f(*z))
            .sum()
    }

    /// Integrates `k` functions at once. Returns the sums together with the
    /// absolute masses `Σ |c_q f(z_q)|`, which bound the attainable accuracy.
    pub fn integrate_many<F>(&self, k: usize, f: &F) -> (Vec<Complex64>, Vec<f64>)
    where
        F: Fn(Complex64, &mut [Complex64]) + Sync,
    {
        let zero = Complex64::new(0.0, 0.0);
        self.nodes
            .par_chunks(256)
            .zip(self.weights.par_chunks(256))
            .map(|(zs, cs)| {
                let mut buf = vec![zero; k];
                let mut sum = vec![zero; k];
                let mut mass = vec![0.0; k];
                for (z, c) in zs.iter().zip(cs) {
                    buf.iter_mut().for_each(|b| *b = zero);
                    f(*z, &mut buf);
                    for i in 0..k {
                        let t = c * buf[i];
                        sum[i] += t;
                        mass[i] += t.norm();
                    }
                }
                (sum, mass)
            })
            .reduce(
                || (vec![zero; k], vec![0.0; k]),
                |(mut s1, mut m1), (s2, m2)| {
                    for i in 0..k {
                        s1[i] += s2[i];
                        m1[i] += m2[i];
                    }
                    (s1, m1)
                },
            )
    }
}

/// Smooth rule around the origin covering the (truncated) domain.
pub fn smooth_rule(weight: &WeightSpec, res: Resolution, degree: usize) -> PlanarRule {
    let radius = weight.truncation_radius(degree);
    let gl = gauss_legendre(res.radial);
    let dtheta = 2.0 * PI / res.angular as f64;
    let mut rule = PlanarRule::default();
    for &(x, gw) in gl.iter() {
        let r = 0.5 * radius * (x + 1.0);
        let radial_weight = 0.5 * radius * gw * r * dtheta;
        for a in 0..res.angular {
            let z = Complex64::from_polar(r, a as f64 * dtheta);
            rule.push(z, Complex64::new(radial_weight * weight.eval(z), 0.0));
        }
    }
    rule
}

/// Where a pole sits relative to the truncated domain of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolePlacement {
    Outside,
    Inside,
    OnBoundary,
}

pub fn pole_placement(weight: &WeightSpec, epsbar: Complex64, degree: usize) -> PolePlacement {
    let p = epsbar.conj().norm();
    match weight.domain {
        DomainSpec::Disk { radius } => {
            if (p - radius).abs() <= 1e-9 * radius {
                PolePlacement::OnBoundary
            } else if p < radius {
                PolePlacement::Inside
            } else {
                PolePlacement::Outside
            }
        }
        DomainSpec::FullPlane { .. } => {
            if p > weight.truncation_radius(degree) {
                PolePlacement::Outside
            } else {
                PolePlacement::Inside
            }
        }
    }
}

/// Rule for `∫ w f /(z̄ − epsbar) dA`.
pub fn pole_rule(weight: &WeightSpec, epsbar: Complex64, res: Resolution, degree: usize) -> PlanarRule {
    let center = epsbar.conj();
    match pole_placement(weight, epsbar, degree) {
        PolePlacement::Outside => {
            let mut rule = smooth_rule(weight, res, degree);
            for (z, c) in rule.nodes.iter().zip(rule.weights.iter_mut()) {
                *c /= z.conj() - epsbar;
            }
            rule
        }
        PolePlacement::Inside => match weight.domain {
            DomainSpec::FullPlane { .. } => {
                let reach = center.norm() + weight.truncation_radius(degree);
                centered_rule(weight, center, res, 0.0, 2.0 * PI, false, |_| reach)
            }
            DomainSpec::Disk { radius } => {
                let gap = radius * radius - center.norm_sqr();
                centered_rule(weight, center, res, 0.0, 2.0 * PI, false, |phi| {
                    let b = (center * Complex64::from_polar(1.0, -phi)).re;
                    -b + (b * b + gap).sqrt()
                })
            }
        },
        PolePlacement::OnBoundary => {
            // Only the half plane of directions pointing into the disk
            // contributes; there the chord length is smooth.
            let inward = (-center).arg();
            centered_rule(weight, center, res, inward - 0.5 * PI, inward + 0.5 * PI, true, |phi| {
                let b = (center * Complex64::from_polar(1.0, -phi)).re;
                (-2.0 * b).max(0.0)
            })
        }
    }
}

/// Polar grid centered on `center`, `φ ∈ [phi0, phi1]`, `ρ ∈ [0, reach(φ)]`,
/// carrying the kernel `e^{iφ} dρ dφ`.
fn centered_rule<R>(
    weight: &WeightSpec,
    center: Complex64,
    res: Resolution,
    phi0: f64,
    phi1: f64,
    gauss_in_angle: bool,
    reach: R,
) -> PlanarRule
where
    R: Fn(f64) -> f64,
{
    let gl = gauss_legendre(res.radial);
    let angles: Vec<(f64, f64)> = if gauss_in_angle {
        let gla = gauss_legendre(res.angular);
        let half = 0.5 * (phi1 - phi0);
        gla.iter()
            .map(|&(x, w)| (phi0 + half * (x + 1.0), half * w))
            .collect()
    } else {
        let d = (phi1 - phi0) / res.angular as f64;
        (0..res.angular).map(|a| (phi0 + a as f64 * d, d)).collect()
    };
    let mut rule = PlanarRule::default();
    for (phi, aw) in angles {
        let len = reach(phi);
        if len <= 0.0 {
            continue;
        }
        let dir = Complex64::from_polar(1.0, phi);
        for &(x, gw) in gl.iter() {
            let rho = 0.5 * len * (x + 1.0);
            let z = center + dir * rho;
            rule.push(z, dir * (0.5 * len * gw * aw * weight.eval(z)));
        }
    }
    rule
}

/// Converged result of an adaptive planar integration.
#[derive(Debug, Clone)]
pub struct AdaptiveIntegral {
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub resolution: Resolution,
}

/// Integrates `k` functions with rules from `build`, doubling the resolution
/// until successive estimates agree to `tolerance` (relative), or to a
/// round-off floor proportional to the absolute mass of the sum.
pub fn adaptive<B, F>(build: B, k: usize, f: F, tolerance: f64, what: &str) -> Result<AdaptiveIntegral>
where
    B: Fn(Resolution) -> PlanarRule,
    F: Fn(Complex64, &mut [Complex64]) + Sync,
{
    let mut res = START_RESOLUTION;
    let (mut prev, _) = build(res).integrate_many(k, &f);
    loop {
        let next_res = res.doubled();
        let (cur, mass) = build(next_res).integrate_many(k, &f);
        let errors: Vec<f64> = prev.iter().zip(&cur).map(|(a, b)| (a - b).norm()).collect();
        let worst = errors
            .iter()
            .zip(&cur)
            .zip(&mass)
            .map(|((e, v), m)| e / (tolerance * v.norm()).max(64.0 * f64::EPSILON * m))
            .fold(0.0, f64::max);
        if worst <= 1.0 {
            return Ok(AdaptiveIntegral {
                values: cur,
                errors,
                resolution: next_res,
            });
        }
        if next_res.radial >= MAX_RESOLUTION.radial || next_res.angular >= MAX_RESOLUTION.angular {
            let (i, e) = errors
                .iter()
                .enumerate()
                .fold((0, 0.0), |acc, (i, e)| if *e > acc.1 { (i, *e) } else { acc });
            return Err(Error::NonConvergence {
                what: what.to_string(),
                error: e,
                tolerance: tolerance * cur[i].norm(),
            });
        }
        prev = cur;
        res = next_res;
    }
}

//! Brute-force ground truth: the eigenvalue integrals
//! `Z_N = ∫ ∏ dw(z_i) |Δ_N(z)|²` and `⟨f⟩ = Z_N⁻¹ ∫ ∏ dw(z_i) f |Δ_N(z)|²`
//! evaluated directly, without any orthogonal-polynomial machinery, by
//! tensor quadrature (`N ≤ 2`) or Monte Carlo (`N ≤ 4`).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deformed::Deformation;
use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::orthopoly::MonicPoly;
use crate::quadrature::{adaptive, pole_rule, smooth_rule, PlanarRule, Resolution};
use crate::ratios::{partial_fractions, RatioQuery};
use crate::weight::WeightSpec;

pub const MAX_QUADRATURE_N: usize = 2;
pub const MAX_MONTE_CARLO_N: usize = 4;

/// Tolerance of the adaptive single-particle integrals.
const ORACLE_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    TensorQuadrature,
    MonteCarlo,
}

impl OracleMethod {
    pub fn max_n(self) -> usize {
        match self {
            OracleMethod::TensorQuadrature => MAX_QUADRATURE_N,
            OracleMethod::MonteCarlo => MAX_MONTE_CARLO_N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub method: OracleMethod,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub samples: usize,
    pub seed: u64,
    pub batches: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            method: OracleMethod::TensorQuadrature,
            radial_nodes: 64,
            angular_nodes: 64,
            samples: 1_000_000,
            seed: 0,
            batches: 32,
        }
    }
}

impl OracleConfig {
    pub fn quadrature(radial_nodes: usize, angular_nodes: usize) -> Self {
        OracleConfig {
            radial_nodes,
            angular_nodes,
            ..Default::default()
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        OracleConfig {
            method: OracleMethod::MonteCarlo,
            samples,
            seed,
            ..Default::default()
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::Constraint("N must be at least 1".into()));
        }
        if n > self.method.max_n() {
            return Err(Error::OracleLimit {
                method: match self.method {
                    OracleMethod::TensorQuadrature => "tensor-quadrature",
                    OracleMethod::MonteCarlo => "monte-carlo",
                },
                n,
            });
        }
        match self.method {
            OracleMethod::TensorQuadrature if self.radial_nodes < 2 || self.angular_nodes < 2 => Err(
                Error::Constraint("oracle needs at least 2 radial and 2 angular nodes".into()),
            ),
            OracleMethod::MonteCarlo if self.batches < 2 || self.samples < 2 * self.batches => Err(
                Error::Constraint("oracle needs at least 2 batches of 2 samples".into()),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: Complex64,
    pub stderr: f64,
    /// Effective number of samples after `|Δ|²` reweighting (Monte Carlo).
    pub neff: Option<f64>,
    pub method: OracleMethod,
    /// Quadrature nodes per particle or Monte Carlo samples used.
    pub samples: usize,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `∏ (μ − z)`.
fn numerator(mus: &[Complex64], z: Complex64) -> Complex64 {
    mus.iter().map(|m| m - z).product()
}

/// `|Δ(z)|²`.
fn vandermonde_sq(z: &[Complex64]) -> f64 {
    let mut v = 1.0;
    for (i, a) in z.iter().enumerate() {
        for b in &z[..i] {
            v *= (a - b).norm_sqr();
        }
    }
    v
}

/// Rule for `∫ dw(z) g(z) / ∏_k (ε̄_k − z̄)`: one pole-centered rule per
/// partial fraction `a_k / (ε̄_k − z̄)`, or the smooth rule without poles.
pub fn deformed_measure_rule(
    spec: &WeightSpec,
    epsbars: &[Complex64],
    res: Resolution,
    degree: usize,
) -> Result<PlanarRule> {
    if epsbars.is_empty() {
        return Ok(smooth_rule(spec, res, degree));
    }
    let pf = partial_fractions(0, epsbars)?;
    let mut rule = PlanarRule::default();
    for (e, a) in epsbars.iter().zip(&pf.coefficients) {
        let part = pole_rule(spec, *e, res, degree).scaled(-a);
        rule.nodes.extend(part.nodes);
        rule.weights.extend(part.weights);
    }
    Ok(rule)
}

/// Sums of `c P`, `c P |z|²`, `c P z`, `c P z̄` over a rule, where `P` is
/// the numerator polynomial, and the absolute masses of the first three.
fn particle_sums(rule: &PlanarRule, mus: &[Complex64]) -> ([Complex64; 4], [f64; 3]) {
    rule.nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(z, c)| {
            let t = c * numerator(mus, *z);
            let a = t.norm();
            let r2 = z.norm_sqr();
            ([t, t * r2, t * z, t * z.conj()], [a, a * r2, a * r2.sqrt()])
        })
        .reduce(
            || ([zero(); 4], [0.0; 3]),
            |(a, am), (b, bm)| {
                (
                    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
                    [am[0] + bm[0], am[1] + bm[1], am[2] + bm[2]],
                )
            },
        )
}

/// `∫ ∏ dw g(z_i) |Δ|²` for `N ≤ 2` from one-particle sums, with the
/// absolute size of the terms that were added.
/// For two particles `|z₁ − z₂|² = |z₁|² + |z₂|² − z₁z̄₂ − z̄₁z₂`, which
/// splits the tensor sum into products of one-particle sums.
fn tensor_integral(n: usize, (s, m): ([Complex64; 4], [f64; 3])) -> (Complex64, f64) {
    match n {
        1 => (s[0], m[0]),
        _ => (2.0 * s[0] * s[1] - 2.0 * s[2] * s[3], 2.0 * (m[0] * m[1] + m[2] * m[2])),
    }
}

/// Round-off floor of a quadrature result of size `value` built from terms
/// of total size `mass`.
fn roundoff(mass: f64) -> f64 {
    64.0 * f64::EPSILON * mass
}

/// Ratio of the deformed to the plain tensor integral and its round-off floor.
fn tensor_value(
    n: usize,
    mus: &[Complex64],
    epsbars: &[Complex64],
    spec: &WeightSpec,
    res: Resolution,
) -> Result<(Complex64, f64)> {
    let degree = 2 * n + mus.len() + 2;
    let (num, num_mass) = tensor_integral(n, particle_sums(&deformed_measure_rule(spec, epsbars, res, degree)?, mus));
    let (den, den_mass) = tensor_integral(n, particle_sums(&smooth_rule(spec, res, degree), &[]));
    let value = num / den;
    Ok((value, roundoff(num_mass + value.norm() * den_mass) / den.norm()))
}

/// Directly integrated `⟨ ∏ D_N[μ_j] / ∏ D_N†[ε̄_k] ⟩_w`.
pub fn oracle_expectation(q: &RatioQuery, spec: &WeightSpec, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.check(q.n)?;
    if q.mus.is_empty() && q.epsbars.is_empty() {
        return Ok(OracleEstimate {
            value: Complex64::new(1.0, 0.0),
            stderr: 0.0,
            neff: None,
            method: cfg.method,
            samples: 0,
        });
    }
    match cfg.method {
        OracleMethod::TensorQuadrature => {
            let res = Resolution::new(cfg.radial_nodes, cfg.angular_nodes);
            let (coarse, _) = tensor_value(q.n, &q.mus, &q.epsbars, spec, res)?;
            let (fine, floor) = tensor_value(q.n, &q.mus, &q.epsbars, spec, res.doubled())?;
            finite(OracleEstimate {
                value: fine,
                stderr: (fine - coarse).norm().max(floor),
                neff: None,
                method: cfg.method,
                samples: cfg.radial_nodes * cfg.angular_nodes * 2,
            })
        }
        OracleMethod::MonteCarlo => {
            check_distance_policy(q, spec)?;
            let mus = q.mus.clone();
            let epsbars = q.epsbars.clone();
            let f = move |z: &[Complex64]| -> Complex64 {
                z.iter()
                    .map(|&zi| numerator(&mus, zi) / epsbars.iter().map(|e| e - zi.conj()).product::<Complex64>())
                    .product()
            };
            let run = monte_carlo(q.n, spec, cfg, &f)?;
            let est = run.ratio_estimate()?;
            finite(est)
        }
    }
}

fn finite(est: OracleEstimate) -> Result<OracleEstimate> {
    if est.value.re.is_finite() && est.value.im.is_finite() && est.stderr.is_finite() {
        Ok(est)
    } else {
        Err(Error::NonFinite("oracle estimate"))
    }
}

/// Monte Carlo runs with `M > 0` need every `ε` at least half a length
/// scale outside the region holding the eigenvalues.
fn check_distance_policy(q: &RatioQuery, spec: &WeightSpec) -> Result<()> {
    let support = spec.support_radius(q.n);
    let needed = 0.5 * spec.length_scale();
    for e in &q.epsbars {
        let distance = e.norm() - support;
        if distance < needed {
            return Err(Error::Constraint(format!(
                "epsbar {e} lies {distance:.3} from the eigenvalue support (radius {support:.3}); \
                 monte-carlo needs at least {needed:.3}, use tensor-quadrature"
            )));
        }
    }
    Ok(())
}

/// `Σ f|Δ|²`, `Σ |Δ|²` and `Σ |Δ|⁴` of one batch.
#[derive(Debug, Clone, Copy)]
struct BatchSums {
    weighted: Complex64,
    vdm: f64,
    vdm_sq: f64,
    count: usize,
}

struct McRun {
    batches: Vec<BatchSums>,
}

impl McRun {
    fn totals(&self) -> BatchSums {
        self.batches.iter().fold(
            BatchSums {
                weighted: zero(),
                vdm: 0.0,
                vdm_sq: 0.0,
                count: 0,
            },
            |a, b| BatchSums {
                weighted: a.weighted + b.weighted,
                vdm: a.vdm + b.vdm,
                vdm_sq: a.vdm_sq + b.vdm_sq,
                count: a.count + b.count,
            },
        )
    }

    /// Ratio `Σ f|Δ|² / Σ |Δ|²` and its batch standard error, linearized
    /// around the pooled ratio.
    fn ratio_stderr(batches: &[BatchSums]) -> (Complex64, f64) {
        let f: Complex64 = batches.iter().map(|b| b.weighted).sum();
        let d: f64 = batches.iter().map(|b| b.vdm).sum();
        let count: usize = batches.iter().map(|b| b.count).sum();
        let ratio = f / d;
        let mean_d = d / count as f64;
        let k = batches.len() as f64;
        let ss: f64 = batches
            .iter()
            .map(|b| ((b.weighted - ratio * b.vdm) / (b.count as f64 * mean_d)).norm_sqr())
            .sum();
        (ratio, (ss / (k * (k - 1.0))).sqrt())
    }

    fn ratio_estimate(&self) -> Result<OracleEstimate> {
        let (value, stderr) = Self::ratio_stderr(&self.batches);
        let (_, half) = Self::ratio_stderr(&self.batches[..self.batches.len() / 2]);
        check_shrinking(stderr, half)?;
        let t = self.totals();
        Ok(OracleEstimate {
            value,
            stderr,
            neff: Some(t.vdm * t.vdm / t.vdm_sq),
            method: OracleMethod::MonteCarlo,
            samples: t.count,
        })
    }
}

/// Doubling the sample count should shrink the error by `1/√2`; a full-run
/// error well above the half-run one signals a heavy-tailed integrand.
fn check_shrinking(full: f64, half: f64) -> Result<()> {
    if full > 1.5 * half {
        return Err(Error::VarianceBlowUp(format!(
            "standard error grew from {half:.3e} to {full:.3e} when doubling the sample count"
        )));
    }
    Ok(())
}

/// Draws `N` eigenvalues i.i.d. from the normalized weight in independent,
/// seed-derived streams, one per batch; batches run in parallel and are
/// reduced in order.
fn monte_carlo<F>(n: usize, spec: &WeightSpec, cfg: &OracleConfig, f: &F) -> Result<McRun>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
{
    let per_batch = cfg.samples / cfg.batches;
    let batches = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let mut z = vec![zero(); n];
            let mut sums = BatchSums {
                weighted: zero(),
                vdm: 0.0,
                vdm_sq: 0.0,
                count: per_batch,
            };
            for _ in 0..per_batch {
                for zi in z.iter_mut() {
                    *zi = draw(spec, &mut rng);
                }
                let v = vandermonde_sq(&z);
                sums.weighted += f(&z) * v;
                sums.vdm += v;
                sums.vdm_sq += v * v;
            }
            sums
        })
        .collect();
    Ok(McRun { batches })
}

/// Sample from the weight restricted to its domain.
fn draw(spec: &WeightSpec, rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let z = spec.sample(rng);
        if spec.contains(z) {
            return z;
        }
    }
}

/// `∫ dw` by adaptive quadrature.
fn single_particle_mass(spec: &WeightSpec) -> Result<f64> {
    let one = |_: Complex64, out: &mut [Complex64]| out[0] = Complex64::new(1.0, 0.0);
    let r = adaptive(|res| smooth_rule(spec, res, 0), 1, one, ORACLE_TOLERANCE, "weight mass")?;
    Ok(r.values[0].re)
}

/// Directly integrated partition function `Z_N`.
pub fn oracle_z(spec: &WeightSpec, n: usize, cfg: &OracleConfig) -> Result<OracleEstimate> {
    cfg.check(n)?;
    match cfg.method {
        OracleMethod::TensorQuadrature => {
            let degree = 2 * n;
            let at = |res| tensor_integral(n, particle_sums(&smooth_rule(spec, res, degree), &[]));
            let res = Resolution::new(cfg.radial_nodes, cfg.angular_nodes);
            let (coarse, _) = at(res);
            let (fine, mass) = at(res.doubled());
            finite(OracleEstimate {
                value: fine,
                stderr: (fine - coarse).norm().max(roundoff(mass)),
                neff: None,
                method: cfg.method,
                samples: cfg.radial_nodes * cfg.angular_nodes,
            })
        }
        OracleMethod::MonteCarlo => {
            let z1 = single_particle_mass(spec)?;
            let run = monte_carlo(n, spec, cfg, &|_: &[Complex64]| zero())?;
            let scale = z1.powi(n as i32);
            let mean_stderr = |bs: &[BatchSums]| {
                let means: Vec<f64> = bs.iter().map(|b| b.vdm / b.count as f64).collect();
                let k = means.len() as f64;
                let mean = means.iter().sum::<f64>() / k;
                let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
                (mean, (var / k).sqrt())
            };
            let (mean, stderr) = mean_stderr(&run.batches);
            let (_, half) = mean_stderr(&run.batches[..run.batches.len() / 2]);
            check_shrinking(stderr, half)?;
            let t = run.totals();
            finite(OracleEstimate {
                value: Complex64::new(scale * mean, 0.0),
                stderr: scale * stderr,
                neff: Some(t.vdm * t.vdm / t.vdm_sq),
                method: cfg.method,
                samples: t.count,
            })
        }
    }
}

/// Moments `∫ dw^{[ℓ,m]} z^j z̄^k`, `j ≤ rows`, `k < cols`, of the deformed
/// measure, by adaptive quadrature of the partial-fraction rule.
pub fn deformed_moments(
    spec: &WeightSpec,
    deformation: &Deformation,
    rows: usize,
    cols: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let degree = rows + cols + deformation.mus.len();
    let k = (rows + 1) * cols;
    let mus = deformation.mus.clone();
    let f = move |z: Complex64, out: &mut [Complex64]| {
        let p = numerator(&mus, z);
        let zb = z.conj();
        let mut zj = p;
        for j in 0..=rows {
            let mut t = zj;
            for c in 0..cols {
                out[j * cols + c] = t;
                t *= zb;
            }
            zj *= z;
        }
    };
    let r = adaptive(
        |res| deformed_measure_rule(spec, &deformation.epsbars, res, degree).unwrap_or_default(),
        k,
        f,
        ORACLE_TOLERANCE,
        "deformed moments",
    )?;
    Ok(r.values.chunks(cols).map(|c| c.to_vec()).collect())
}

/// Monic degree-`n` polynomial bi-orthogonal to `z̄^k`, `k < n`, under the
/// deformed measure, from a linear solve on its quadrature moments.
pub fn oracle_deformed_op(
    spec: &WeightSpec,
    deformation: &Deformation,
    n: usize,
    _cfg: &OracleConfig,
) -> Result<MonicPoly> {
    // validates distinct poles before building partial fractions
    let deformation = Deformation::new(deformation.mus.clone(), deformation.epsbars.clone())?;
    if n == 0 {
        return Ok(MonicPoly::monomial(0));
    }
    let g = deformed_moments(spec, &deformation, n, n)?;
    // Σ_j c_j G[j][k] = −G[n][k]
    let a: Vec<Vec<Complex64>> = (0..n).map(|k| (0..n).map(|j| g[j][k]).collect()).collect();
    let b: Vec<Complex64> = (0..n).map(|k| -g[n][k]).collect();
    let lower = solve(a, b).map_err(|_| Error::SingularDeterminant {
        what: "deformed moment system",
        conditioning: f64::INFINITY,
    })?;
    Ok(MonicPoly::from_lower(lower))
}

/// `|∫ dw^{[ℓ,m]} p(z) z̄^k| / ∫ |dw^{[ℓ,m]} p(z) z̄^k|` for `k < deg p`.
pub fn biorthogonality_residuals(spec: &WeightSpec, deformation: &Deformation, p: &MonicPoly) -> Result<Vec<f64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    let degree = 2 * n + deformation.mus.len();
    let mus = deformation.mus.clone();
    let coeffs = p.coeffs().to_vec();
    let f = move |z: Complex64, out: &mut [Complex64]| {
        let mut t = numerator(&mus, z) * coeffs.iter().rev().fold(zero(), |acc, c| acc * z + c);
        for o in out.iter_mut() {
            *o = t;
            t *= z.conj();
        }
    };
    let res = Resolution::new(256, 256);
    let rule = deformed_measure_rule(spec, &deformation.epsbars, res, degree)?;
    let (sums, masses) = rule.integrate_many(n, &f);
    Ok(sums.iter().zip(&masses).map(|(s, m)| s.norm() / m).collect())
}

//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use charpoly_ratios::cauchy::CauchyRow;
use charpoly_ratios::deformed::{christoffel_poly, combined_poly, deformed_poly_coefficients, uvarov_poly};
use charpoly_ratios::oracle::{biorthogonality_residuals, oracle_expectation, oracle_z};
use charpoly_ratios::orthopoly::partition_function;
use charpoly_ratios::ratios::{
    confluent_expectation, expectation_inverses, expectation_products, expectation_ratio, heine_inverse,
};
use charpoly_ratios::{
    CauchyEvaluator, CauchyMethod, Deformation, DomainSpec, Family, MuGroup, OracleConfig, OrthoSystem, RatioQuery,
    WeightSpec,
};
use num_complex::Complex64;
use statrs::function::gamma::gamma_lr;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: usize,
    failures: Vec<String>,
    start: Instant,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            checks: 0,
            failures: Vec::new(),
            start: Instant::now(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    fn runtime(&mut self, limit_secs: f64) {
        let t = self.start.elapsed().as_secs_f64();
        self.check(t < limit_secs, || format!("runtime {t:.2}s exceeds {limit_secs}s"));
    }

    fn finish(self) -> bool {
        let t = self.start.elapsed().as_secs_f64();
        let status = if self.failures.is_empty() { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{}]: {} ({} checks, {} failed, {:.2}s)",
            self.id,
            self.title,
            status,
            self.checks,
            self.failures.len(),
            t
        );
        for f in &self.failures {
            println!("    - {f}");
        }
        self.failures.is_empty()
    }
}

fn system(w: &WeightSpec, degree: usize) -> (OrthoSystem, CauchyEvaluator) {
    let sys = OrthoSystem::for_weight(w, degree).expect("orthogonal system");
    let cev = CauchyEvaluator::new(&sys);
    (sys, cev)
}

fn elliptic(tau: f64) -> WeightSpec {
    WeightSpec::custom(Family::EllipticGaussian { tau }, DomainSpec::FullPlane { cutoff: Some(9.0) }).unwrap()
}

fn shifted() -> WeightSpec {
    WeightSpec::custom(
        Family::ShiftedGaussian {
            center: c(0.4, -0.3),
            scale: 1.0,
        },
        DomainSpec::FullPlane { cutoff: Some(9.0) },
    )
    .unwrap()
}

/// `count` points at distance `gap` outside radius `support`, spread in angle.
fn points(count: usize, support: f64, gap: f64, phase: f64) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(support + gap + 0.15 * j as f64, phase + 2.1 * j as f64))
        .collect()
}

fn criterion_1() -> bool {
    let mut cr = Criterion::new(1, "orthogonal systems");
    let gauss = OrthoSystem::for_weight(&WeightSpec::gaussian(), 8).unwrap();
    let disk = OrthoSystem::for_weight(&WeightSpec::disk_flat(1.0).unwrap(), 8).unwrap();
    for k in 0..=8 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        for (name, sys, norm) in [("gaussian", &gauss, PI * fact), ("disk-flat", &disk, PI / (k + 1) as f64)] {
            let p = sys.poly(k).unwrap();
            let worst = p.coeffs()[..k].iter().map(|a| a.norm()).fold(0.0, f64::max);
            cr.check(worst < 1e-10, || format!("{name} pi_{k}: lower coefficient {worst:e}"));
            let r = (sys.norm(k).unwrap() - norm).abs() / norm;
            cr.check(r < 1e-8, || format!("{name} r_{k}: relative error {r:e}"));
        }
    }
    cr.runtime(1.0);
    cr.finish()
}

fn criterion_2() -> bool {
    let mut cr = Criterion::new(2, "Cauchy closed forms");
    for (name, w) in [("disk-flat", WeightSpec::disk_flat(1.0).unwrap()), ("gaussian", WeightSpec::gaussian())] {
        let sys = OrthoSystem::for_weight(&w, 5).unwrap();
        let cev = CauchyEvaluator::with_method(&sys, CauchyMethod::Quadrature).unwrap();
        for radius in [1.5, 2.0, 5.0, 20.0] {
            for angle in [0.0, 0.9, 2.6] {
                let e = Complex64::from_polar(radius, angle);
                let row: CauchyRow = cev.transforms(0..6, e).unwrap();
                for (n, h) in row.values.iter().enumerate() {
                    let np1 = (n + 1) as i32;
                    let exact = if name == "disk-flat" {
                        c(0.0, 1.0) / (2.0 * (n + 1) as f64 * e.powi(np1))
                    } else {
                        let lower = gamma_lr((n + 1) as f64, radius * radius) * (1..=n).map(|i| i as f64).product::<f64>();
                        c(0.0, 0.5) * lower / e.powi(np1)
                    };
                    let r = rel(*h, exact);
                    cr.check(r < 1e-7, || format!("{name} h_{n}({e}): relative error {r:e}"));
                }
            }
        }
    }
    cr.runtime(10.0);
    cr.finish()
}

fn criterion_3() -> bool {
    let mut cr = Criterion::new(3, "exact anchor");
    let q = RatioQuery::new(1, vec![], vec![c(2.0, 0.0)]).unwrap();
    let disk = WeightSpec::disk_flat(1.0).unwrap();
    let (sys, cev) = system(&disk, 2);
    let v = expectation_ratio(&q, &sys, &cev).unwrap().value;
    cr.check((v - c(0.5, 0.0)).norm() < 1e-10, || format!("disk-flat formula {v}"));
    let o = oracle_expectation(&q, &disk, &OracleConfig::default()).unwrap();
    cr.check((o.value - c(0.5, 0.0)).norm() < 1e-6, || format!("disk-flat oracle {}", o.value));
    let (sys, cev) = system(&WeightSpec::gaussian(), 2);
    let v = expectation_ratio(&q, &sys, &cev).unwrap().value;
    let exact = 0.5 * (1.0 - (-4.0f64).exp());
    cr.check((v - c(exact, 0.0)).norm() < 1e-8, || format!("gaussian formula {v} vs {exact}"));
    cr.finish()
}

fn criterion_4() -> bool {
    let mut cr = Criterion::new(4, "formula vs oracle");
    let weights = [("gaussian", WeightSpec::gaussian()), ("disk-flat", WeightSpec::disk_flat(1.0).unwrap())];
    for (name, w) in &weights {
        let (sys, cev) = system(w, 8);
        for n in 1..=2 {
            let support = w.support_radius(n);
            for l in 0..=2 {
                for m in 0..=n.min(2) {
                    let q = RatioQuery::new(n, points(l, support, 0.6, 0.3), points(m, support, 0.7, 1.1)).unwrap();
                    let f = expectation_ratio(&q, &sys, &cev).unwrap().value;
                    let o = oracle_expectation(&q, w, &OracleConfig::default()).unwrap();
                    let r = rel(f, o.value);
                    cr.check(r < 1e-6, || format!("{name} N={n} L={l} M={m}: formula {f}, oracle {}, rel {r:e}", o.value));
                }
            }
        }
        let n = 3;
        let support = w.support_radius(n);
        for l in 0..=2 {
            for m in 0..=2 {
                let q = RatioQuery::new(n, points(l, support, 0.6, 0.3), points(m, support, 0.7, 1.1)).unwrap();
                let f = expectation_ratio(&q, &sys, &cev).unwrap().value;
                let o = oracle_expectation(&q, w, &OracleConfig::monte_carlo(2_000_000, 2024)).unwrap();
                let dev = (f - o.value).norm();
                cr.check(dev <= 3.0 * o.stderr, || {
                    format!("{name} N=3 L={l} M={m}: formula {f}, MC {} ± {:e}", o.value, o.stderr)
                });
                let noise = o.stderr / o.value.norm();
                cr.check(noise <= 0.02 || (l == 0 && m == 0), || {
                    format!("{name} N=3 L={l} M={m}: relative stderr {noise:.3}")
                });
            }
        }
    }
    cr.runtime(600.0);
    cr.finish()
}

fn criterion_5() -> bool {
    let mut cr = Criterion::new(5, "Heine identities");
    let weights = [
        ("gaussian", WeightSpec::gaussian()),
        ("disk-flat", WeightSpec::disk_flat(1.0).unwrap()),
        ("elliptic", elliptic(0.4)),
    ];
    for (name, w) in &weights {
        let (sys, cev) = system(w, 4);
        for n in 1..=2 {
            for mu in [c(0.3, -0.2), c(1.7, 0.9)] {
                let q = RatioQuery::new(n, vec![mu], vec![]).unwrap();
                let o = oracle_expectation(&q, w, &OracleConfig::default()).unwrap();
                let pi = sys.poly(n).unwrap().eval(mu);
                let r = rel(pi, o.value);
                cr.check(r < 1e-6, || format!("{name} N={n} <D[{mu}]>: pi_N {pi}, oracle {}", o.value));
            }
            for e in [c(2.6, 0.8), c(-0.4, 2.9), c(0.5, 0.2)] {
                let q = RatioQuery::new(n, vec![], vec![e]).unwrap();
                let o = oracle_expectation(&q, w, &OracleConfig::default()).unwrap();
                let h = heine_inverse(n, e, &sys, &cev).unwrap();
                let r = rel(h, o.value);
                cr.check(r < 1e-6, || format!("{name} N={n} <1/D†[{e}]>: formula {h}, oracle {}", o.value));
            }
        }
    }
    cr.finish()
}

fn criterion_6() -> bool {
    let mut cr = Criterion::new(6, "path consistency");
    let weights = [
        ("gaussian", WeightSpec::gaussian()),
        ("disk-flat", WeightSpec::disk_flat(1.0).unwrap()),
        ("elliptic", elliptic(0.3)),
        ("shifted", shifted()),
    ];
    for (name, w) in &weights {
        let (sys, cev) = system(w, 8);
        for n in 1..=4 {
            for l in 1..=3 {
                let q = RatioQuery::new(n, points(l, 0.2, 0.4, 0.7), vec![]).unwrap();
                let a = expectation_ratio(&q, &sys, &cev).unwrap().value;
                let b = expectation_products(&q, &sys).unwrap().value;
                let r = rel(b, a);
                cr.check(r < 1e-9, || format!("{name} N={n} L={l}: products {b} vs {a}"));
            }
            for m in 1..=n.min(3) {
                let q = RatioQuery::new(n, vec![], points(m, w.support_radius(n), 0.5, 0.2)).unwrap();
                let a = expectation_ratio(&q, &sys, &cev).unwrap().value;
                let b = expectation_inverses(&q, &sys, &cev).unwrap().value;
                let r = rel(b, a);
                cr.check(r < 1e-9, || format!("{name} N={n} M={m}: inverses {b} vs {a}"));
            }
        }
    }
    cr.finish()
}

fn criterion_7() -> bool {
    let mut cr = Criterion::new(7, "structural invariants");
    let weights = [
        ("gaussian", WeightSpec::gaussian()),
        ("disk-flat", WeightSpec::disk_flat(1.0).unwrap()),
        ("elliptic", elliptic(0.3)),
    ];
    for (name, w) in &weights {
        let (sys, cev) = system(w, 8);
        let (ssys, scev) = system(&w.scaled(3.7).unwrap(), 8);
        for (n, l, m) in [(1, 2, 1), (2, 2, 2), (3, 3, 2), (4, 1, 3), (3, 0, 3)] {
            let mus = points(l, 0.1, 0.3, 0.4);
            let eps = points(m, w.support_radius(n), 0.4, 2.0);
            let q = RatioQuery::new(n, mus.clone(), eps.clone()).unwrap();
            let v = expectation_ratio(&q, &sys, &cev).unwrap().value;
            let mut rmus = mus.clone();
            rmus.rotate_left(1.min(l));
            let mut reps = eps.clone();
            reps.reverse();
            let p = expectation_ratio(&RatioQuery::new(n, rmus, reps).unwrap(), &sys, &cev).unwrap().value;
            let r = rel(p, v);
            cr.check(r < 1e-12, || format!("{name} N={n} L={l} M={m}: permutation rel {r:e}"));
            let s = expectation_ratio(&q, &ssys, &scev).unwrap().value;
            let r = rel(s, v);
            cr.check(r < 1e-12, || format!("{name} N={n} L={l} M={m}: scaling rel {r:e}"));
        }
        let one = expectation_ratio(&RatioQuery::new(3, vec![], vec![]).unwrap(), &sys, &cev).unwrap().value;
        cr.check(one == c(1.0, 0.0), || format!("{name}: L = M = 0 gave {one}"));
        for n in 1..=3 {
            let z = partition_function(&sys, n).unwrap();
            let cfg = if n <= 2 {
                OracleConfig::default()
            } else {
                OracleConfig::monte_carlo(2_000_000, 99)
            };
            let o = oracle_z(w, n, &cfg).unwrap();
            let ok = if n <= 2 {
                (o.value.re - z).abs() < 1e-6 * z
            } else {
                (o.value.re - z).abs() <= 3.0 * o.stderr
            };
            cr.check(ok, || format!("{name} Z_{n}: {z} vs oracle {} ± {:e}", o.value.re, o.stderr));
        }
    }
    cr.finish()
}

fn criterion_8() -> bool {
    let mut cr = Criterion::new(8, "deformed polynomials");
    let weights = [("gaussian", WeightSpec::gaussian()), ("disk-flat", WeightSpec::disk_flat(1.0).unwrap())];
    let mus = [c(1.6, 0.5), c(-0.7, 1.9)];
    let eps = [c(2.1, -0.6), c(-1.3, -2.2)];
    for (name, w) in &weights {
        let (sys, cev) = system(w, 10);
        for l in 0..=2 {
            for m in 0..=2 {
                let d = Deformation::new(mus[..l].to_vec(), eps[..m].to_vec()).unwrap();
                for n in m.max(1)..=4 {
                    let p = deformed_poly_coefficients(&sys, &cev, &d, n).unwrap();
                    let res = biorthogonality_residuals(w, &d, &p).unwrap();
                    let worst = res.iter().cloned().fold(0.0, f64::max);
                    cr.check(worst < 1e-6, || format!("{name} l={l} m={m} n={n}: residual {worst:e}"));
                }
            }
        }
        for n in 2..=4 {
            for z in [c(0.3, 0.1), c(-1.2, 0.8)] {
                let ch = christoffel_poly(&sys, &mus, n, z).unwrap().value;
                let co = combined_poly(&sys, &cev, &mus, &[], n, z).unwrap().value;
                let r = rel(co, ch);
                cr.check(r < 1e-12, || format!("{name} n={n}: combined(m=0) {co} vs christoffel {ch}"));
                let uv = uvarov_poly(&sys, &cev, &eps, n, z).unwrap().value;
                let co = combined_poly(&sys, &cev, &[], &eps, n, z).unwrap().value;
                let r = rel(co, uv);
                cr.check(r < 1e-12, || format!("{name} n={n}: combined(l=0) {co} vs uvarov {uv}"));
                let pi = sys.poly(n).unwrap().eval(z);
                let ch0 = christoffel_poly(&sys, &[], n, z).unwrap().value;
                let uv0 = uvarov_poly(&sys, &cev, &[], n, z).unwrap().value;
                cr.check(rel(ch0, pi) < 1e-12 && rel(uv0, pi) < 1e-12, || {
                    format!("{name} n={n}: empty deformation {ch0}, {uv0} vs pi_n {pi}")
                });
            }
        }
    }
    // anchor: disk-flat, m = 1, n = 1, epsbar = 2, stated as z − 1/2
    let disk = WeightSpec::disk_flat(1.0).unwrap();
    let (sys, cev) = system(&disk, 2);
    let d = Deformation::new(vec![], vec![c(2.0, 0.0)]).unwrap();
    let p = deformed_poly_coefficients(&sys, &cev, &d, 1).unwrap();
    let constant = p.coeffs()[0];
    cr.check((constant - c(-0.5, 0.0)).norm() < 1e-9, || {
        format!("uvarov disk-flat m=1 n=1 epsbar=2: got z + ({constant}), expected z - 1/2")
    });
    cr.finish()
}

fn criterion_9() -> bool {
    let mut cr = Criterion::new(9, "confluence");
    let cases = [
        ("gaussian", WeightSpec::gaussian(), 2, c(0.8, 0.6), vec![]),
        ("gaussian", WeightSpec::gaussian(), 3, c(-1.1, 0.4), vec![c(2.9, 1.0)]),
        ("disk-flat", WeightSpec::disk_flat(1.0).unwrap(), 2, c(0.5, -0.9), vec![c(1.8, 0.7)]),
    ];
    for (name, w, n, mu, eps) in &cases {
        let (sys, cev) = system(w, 8);
        let q = RatioQuery::confluent(*n, vec![MuGroup { value: *mu, multiplicity: 2 }], eps.clone()).unwrap();
        let exact = confluent_expectation(&q, &sys, &cev).unwrap().value;
        let deltas = [1e-2, 1e-3, 1e-4];
        let raw: Vec<Complex64> = deltas
            .iter()
            .map(|d| {
                let q = RatioQuery::new(*n, vec![*mu, mu + d], eps.clone()).unwrap();
                expectation_ratio(&q, &sys, &cev).unwrap().value
            })
            .collect();
        // first-order Richardson with step ratio 10
        let extrapolated: Vec<Complex64> = raw.windows(2).map(|p| (10.0 * p[1] - p[0]) / 9.0).collect();
        let raw_err: Vec<f64> = raw.iter().map(|v| rel(*v, exact)).collect();
        let ext_err: Vec<f64> = extrapolated.iter().map(|v| rel(*v, exact)).collect();
        cr.check(raw_err.windows(2).all(|p| p[1] < p[0]), || format!("{name} mu={mu}: errors {raw_err:?} not decreasing"));
        let last = ext_err[ext_err.len() - 1];
        cr.check(last <= 1e-5, || format!("{name} mu={mu}: extrapolated error {last:e}"));
        if *n <= 2 {
            let o = oracle_expectation(&q, w, &OracleConfig::default()).unwrap();
            let r = rel(exact, o.value);
            cr.check(r < 1e-6, || format!("{name} mu={mu}: confluent {exact} vs oracle {}", o.value));
        }
    }
    cr.finish()
}

fn main() -> ExitCode {
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

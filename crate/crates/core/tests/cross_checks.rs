use charpoly_ratios::deformed::{combined_poly, deformed_cauchy, deformed_poly_coefficients, uvarov_poly};
use charpoly_ratios::oracle::{deformed_measure_rule, oracle_deformed_op, oracle_expectation};
use charpoly_ratios::quadrature::Resolution;
use charpoly_ratios::ratios::{confluent_expectation, expectation_decomposed, expectation_ratio};
use charpoly_ratios::{CauchyEvaluator, Deformation, MuGroup, OracleConfig, OrthoSystem, RatioQuery, WeightSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn uvarov_disk_anchor_matches_biorthogonality() {
    let w = WeightSpec::disk_flat(1.0).unwrap();
    let sys = OrthoSystem::for_weight(&w, 3).unwrap();
    let cev = CauchyEvaluator::new(&sys);
    let d = Deformation::new(vec![], vec![c(2.0, 0.0)]).unwrap();
    let direct = oracle_deformed_op(&w, &d, 1, &OracleConfig::default()).unwrap();
    let formula = deformed_poly_coefficients(&sys, &cev, &d, 1).unwrap();
    assert!((direct.coeffs()[0] - c(-0.25, 0.0)).norm() < 1e-10);
    assert!((formula.coeffs()[0] - c(-0.25, 0.0)).norm() < 1e-14);
    let z = c(0.7, -0.1);
    assert!((uvarov_poly(&sys, &cev, &[c(2.0, 0.0)], 1, z).unwrap().value - (z - 0.25)).norm() < 1e-14);
}

#[test]
fn combined_poly_matches_direct_solve() {
    let w = WeightSpec::gaussian();
    let sys = OrthoSystem::for_weight(&w, 6).unwrap();
    let cev = CauchyEvaluator::new(&sys);
    let d = Deformation::new(vec![c(1.0, 0.0)], vec![c(2.0, 0.0)]).unwrap();
    for n in 1..=3 {
        let p = oracle_deformed_op(&w, &d, n, &OracleConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        for _ in 0..10 {
            let z = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let f = combined_poly(&sys, &cev, &d.mus, &d.epsbars, n, z).unwrap().value;
            let o = p.eval(z);
            assert!((f - o).norm() < 1e-8 * o.norm().max(1.0), "n={n} z={z}: {f} vs {o}");
        }
    }
}

#[test]
fn deformed_cauchy_matches_direct_integral() {
    // disk-flat, poles at 2 (measure) and 3 (transform)
    let w = WeightSpec::disk_flat(1.0).unwrap();
    let sys = OrthoSystem::for_weight(&w, 3).unwrap();
    let cev = CauchyEvaluator::new(&sys);
    let e1 = c(2.0, 0.0);
    let e = c(3.0, 0.0);
    let formula = deformed_cauchy(&sys, &cev, &[e1], 1, e).unwrap();
    // (1/2πi) ∫ dw π(z) / ((ε̄₁ − z̄)(z̄ − ε̄)), with π(z) = z − 1/4
    let rule = deformed_measure_rule(&w, &[e1], Resolution::new(128, 128), 4).unwrap();
    let direct = rule.integrate(|z| (z - 0.25) / (z.conj() - e)) / c(0.0, 2.0 * PI);
    assert!((formula - direct).norm() < 1e-12 * direct.norm(), "{formula} vs {direct}");
}

#[test]
fn full_telescope_matches_oracle() {
    let w = WeightSpec::gaussian();
    let sys = OrthoSystem::for_weight(&w, 6).unwrap();
    let cev = CauchyEvaluator::new(&sys);
    let q = RatioQuery::new(2, vec![c(0.5, 2.2), c(-2.0, 0.3)], vec![c(2.4, -1.0), c(-0.6, 2.6)]).unwrap();
    let d = expectation_decomposed(&q, &sys, &cev).unwrap().value;
    let t = expectation_ratio(&q, &sys, &cev).unwrap().value;
    let o = oracle_expectation(&q, &w, &OracleConfig::default()).unwrap().value;
    assert!((d - t).norm() < 1e-9 * t.norm());
    assert!((t - o).norm() < 1e-8 * o.norm());
}

#[test]
fn triple_confluence_matches_oracle() {
    let w = WeightSpec::disk_flat(1.0).unwrap();
    let sys = OrthoSystem::for_weight(&w, 6).unwrap();
    let cev = CauchyEvaluator::new(&sys);
    let q = RatioQuery::confluent(
        2,
        vec![MuGroup { value: c(0.4, 0.2), multiplicity: 3 }, MuGroup { value: c(-1.0, 0.5), multiplicity: 1 }],
        vec![c(1.5, 1.0)],
    )
    .unwrap();
    let v = confluent_expectation(&q, &sys, &cev).unwrap().value;
    let o = oracle_expectation(&q, &w, &OracleConfig::default()).unwrap().value;
    assert!((v - o).norm() < 1e-9 * o.norm(), "{v} vs {o}");
}

#[test]
fn pole_inside_support_matches_oracle() {
    // no distance requirement for the formula itself
    for w in [WeightSpec::gaussian(), WeightSpec::disk_flat(1.0).unwrap()] {
        let sys = OrthoSystem::for_weight(&w, 6).unwrap();
        let cev = CauchyEvaluator::new(&sys);
        let q = RatioQuery::new(2, vec![c(0.2, -0.3)], vec![c(0.5, 0.4), c(-0.3, -0.6)]).unwrap();
        let v = expectation_ratio(&q, &sys, &cev).unwrap().value;
        let o = oracle_expectation(&q, &w, &OracleConfig::default()).unwrap();
        assert!((v - o.value).norm() < 1e-7 * o.value.norm(), "{v} vs {:?}", o);
    }
}

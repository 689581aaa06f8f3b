mod common;

use common::*;
use depord::ccx::{is_independent, is_perfect};
use depord::dist_core::DiscreteMarginal;
use depord::measures::chatterjee_xi;
use depord::models::bvn::bvn_cdf;
use depord::models::{
    additive_error_verify, bernoulli_ccx, bernoulli_classify, bernoulli_to_model, error_shape, gaussian_ccx,
    gaussian_discretize, gaussian_r2, si_copula_ccx, BernoulliClass, ErrorShape, GaussianSpec,
};
use depord::reduce::{concordance_leq, reduce_to_si};
use depord::{ccx_compare, Verdict, DEFAULT_TOL};
use proptest::prelude::*;
use rand::Rng;

fn random_spec(r: &mut TestRng) -> GaussianSpec {
    let d = r.random_range(2..5usize);
    let a: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let cov = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| (0..d).map(|k| a[i][k] * a[j][k]).sum::<f64>() + if i == j { 0.05 } else { 0.0 })
                .collect()
        })
        .collect();
    GaussianSpec::new(vec![0.0; d], cov).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn bernoulli_closed_form_matches_engine(seed in any::<u64>()) {
        let (a, b) = bernoulli_pair(&mut rng(seed));
        let closed = bernoulli_ccx(&a, &b, 1e-12).unwrap().verdict;
        let engine = ccx_compare(&bernoulli_to_model(&a).unwrap(), &bernoulli_to_model(&b).unwrap(), 1e-12).verdict;
        prop_assert_eq!(closed, engine);
    }

    #[test]
    fn bernoulli_classes_match_model_flags(seed in any::<u64>()) {
        let (a, _) = bernoulli_pair(&mut rng(seed));
        let classes = bernoulli_classify(&a, 1e-12);
        let m = bernoulli_to_model(&a).unwrap();
        prop_assert_eq!(classes.contains(&BernoulliClass::Independent), is_independent(&m, 1e-12));
        prop_assert_eq!(classes.contains(&BernoulliClass::Perfect), is_perfect(&m, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gaussian_models_are_always_comparable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_spec(&mut r), random_spec(&mut r));
        let v = gaussian_ccx(&a, &b, DEFAULT_TOL).unwrap().verdict;
        prop_assert!(v != Verdict::Incomparable && v != Verdict::MarginalMismatch);
    }
}

#[test]
fn gaussian_xi_follows_r2() {
    let mut r = rng(21);
    let mut checked = 0;
    while checked < 30 {
        let (a, b) = (random_spec(&mut r), random_spec(&mut r));
        let (ra, rb) = (gaussian_r2(&a).unwrap(), gaussian_r2(&b).unwrap());
        if ra >= rb - 0.05 {
            continue;
        }
        let xa = chatterjee_xi(&gaussian_discretize(&a, 50, 50, None).unwrap()).unwrap();
        let xb = chatterjee_xi(&gaussian_discretize(&b, 50, 50, None).unwrap()).unwrap();
        assert!(xa < xb + 0.01, "r2 {ra} < {rb} but xi {xa} vs {xb}");
        checked += 1;
    }
}

#[test]
fn gaussian_discretizations_agree_with_closed_form() {
    let lo = gaussian_discretize(&GaussianSpec::bivariate(0.3).unwrap(), 50, 50, None).unwrap();
    let hi = gaussian_discretize(&GaussianSpec::bivariate(0.6).unwrap(), 50, 50, None).unwrap();
    let closed = gaussian_ccx(
        &GaussianSpec::bivariate(0.3).unwrap(),
        &GaussianSpec::bivariate(0.6).unwrap(),
        DEFAULT_TOL,
    )
    .unwrap()
    .verdict;
    assert_eq!(closed, Verdict::LessEq);
    assert_eq!(ccx_compare(&lo, &hi, DEFAULT_TOL).verdict, closed);
}

#[test]
fn gaussian_examples() {
    let eq = GaussianSpec::equicorrelated(2, 0.5).unwrap();
    assert!((gaussian_r2(&eq).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    let diag = GaussianSpec::new(
        vec![0.0; 3],
        vec![vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 3.0]],
    )
    .unwrap();
    assert!(gaussian_r2(&diag).unwrap().abs() < 1e-12);
    // Y = X1 with a duplicated predictor: singular covariance.
    let copy = GaussianSpec::new(vec![0.0; 3], vec![vec![1.0; 3]; 3]).unwrap();
    assert!((gaussian_r2(&copy).unwrap() - 1.0).abs() < 1e-12);
    for p in [2, 3, 4] {
        let cap = 1.0 / (p as f64).sqrt();
        let grid: Vec<f64> = (1..10).map(|k| cap * k as f64 / 10.0).collect();
        for w in grid.windows(2) {
            let a = GaussianSpec::independent_predictors(p, w[0]).unwrap();
            let b = GaussianSpec::independent_predictors(p, w[1]).unwrap();
            assert_eq!(gaussian_ccx(&a, &b, DEFAULT_TOL).unwrap().verdict, Verdict::LessEq);
        }
    }
}

/// The Gaussian copula cdf at `(u, v)` straight from the bivariate normal cdf.
fn gaussian_copula(u: f64, v: f64, r: f64) -> f64 {
    use depord::models::bvn::phi_inv;
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v.min(1.0);
    }
    if v >= 1.0 {
        return u;
    }
    bvn_cdf(phi_inv(u), phi_inv(v), r)
}

#[test]
fn gaussian_checkerboards_are_concordance_ordered() {
    let n = 20;
    let grid = |r: f64| reduce_to_si(&gaussian_discretize(&GaussianSpec::bivariate(r).unwrap(), n, n, None).unwrap());
    let (g3, g6) = (grid(0.3), grid(0.6));
    for i in 1..n {
        for j in 1..n {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            assert!(gaussian_copula(u, v, 0.3) <= gaussian_copula(u, v, 0.6));
        }
    }
    assert_eq!(concordance_leq(&g3, &g6, DEFAULT_TOL).verdict, Verdict::LessEq);
    let (g2, g7) = (grid(0.2), grid(0.7));
    let res = si_copula_ccx(&g2, &g7, DEFAULT_TOL).unwrap();
    assert_eq!(res.verdict, Verdict::LessEq);
    assert_eq!(si_copula_ccx(&g2, &g2, DEFAULT_TOL).unwrap().verdict, Verdict::Equal);
    let ind = grid(0.0);
    assert_eq!(si_copula_ccx(&ind, &g7, DEFAULT_TOL).unwrap().verdict, Verdict::LessEq);
}

#[test]
fn additive_noise_lowers_dependence_for_standard_shapes() {
    let f = error_shape(ErrorShape::Normal, 41).unwrap();
    for shape in [ErrorShape::Normal, ErrorShape::Uniform, ErrorShape::ShiftedExponential] {
        let eps = error_shape(shape, 41).unwrap();
        let steps = additive_error_verify(&f, &eps, &[0.0, 0.5, 1.0, 2.0], 60, DEFAULT_TOL).unwrap();
        for s in steps {
            assert!(
                s.result.verdict.is_le(),
                "{shape:?} {} -> {}: {}",
                s.sigma,
                s.sigma_next,
                s.result.verdict
            );
        }
    }
}

fn random_marginal(r: &mut TestRng, max_atoms: usize, spread: f64) -> DiscreteMarginal {
    let n = r.random_range(2..=max_atoms);
    let mut atoms: Vec<f64> = (0..n).map(|_| r.random_range(-spread..spread)).collect();
    atoms.sort_by(f64::total_cmp);
    atoms.dedup();
    let probs = random_probs(r, atoms.len(), false);
    DiscreteMarginal::new(atoms, probs).unwrap()
}

#[test]
fn additive_noise_lowers_dependence_for_fuzzed_laws() {
    let mut r = rng(99);
    let mut violations = Vec::new();
    for k in 0..100 {
        let f = random_marginal(&mut r, 12, 2.0);
        let eps = random_marginal(&mut r, 12, 1.0);
        let steps = additive_error_verify(&f, &eps, &[0.25, 0.5, 1.0, 2.0], 60, DEFAULT_TOL).unwrap();
        for s in steps {
            if !s.result.verdict.is_le() {
                violations.push((k, s.sigma, s.result.verdict));
            }
        }
    }
    assert!(violations.is_empty(), "{violations:?}");
}

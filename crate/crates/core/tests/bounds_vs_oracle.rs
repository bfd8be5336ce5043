mod common;

use common::{abs_integral, random_system, rel_err, rng, sign_changes, ANY, SIMPLE};
use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use wcbound::bounds::{
    bound_complex_pair, bound_distinct_real_pair, bound_double_real_pair, group_bound, paired_channels, BoundOptions,
    ComplexPairWork, DoubleRealWork, RealPairFormula, RealPairWork,
};
use wcbound::lti::{PairGroup, DEFAULT_EPS_MULTIPLICITY};
use wcbound::oracle::matrix_exponential;
use wcbound::{
    eigendecompose_and_classify, modal_coefficients, total_bound, ClosedLoopSystem, DisturbanceBounds, PairingStrategy,
};

fn group_fn(g: PairGroup) -> impl Fn(f64) -> f64 {
    move |t: f64| match g {
        PairGroup::RealPair { c_i, c_j, lambda_i, lambda_j, .. } => {
            c_i * (lambda_i * t).exp() + c_j * (lambda_j * t).exp()
        }
        PairGroup::DoubleRealPair { c_i, c_ip1, lambda, .. } => (c_i * t + c_ip1) * (lambda * t).exp(),
        PairGroup::ComplexPair { c, sigma, omega, .. } => 2.0 * (c * (Complex::new(sigma, omega) * t).exp()).re,
        PairGroup::Singleton { c, lambda, .. } => c * (lambda * t).exp(),
    }
}

fn group_rates(g: PairGroup) -> (f64, f64) {
    match g {
        PairGroup::RealPair { lambda_i, lambda_j, .. } => (lambda_i.max(lambda_j), lambda_i.abs().max(lambda_j.abs())),
        PairGroup::DoubleRealPair { lambda, .. } => (lambda, lambda.abs()),
        PairGroup::ComplexPair { sigma, omega, .. } => (sigma, Complex::new(sigma, omega).norm()),
        PairGroup::Singleton { lambda, .. } => (lambda, lambda.abs()),
    }
}

/// Test-local quadrature of one group's absolute integral.
fn group_quadrature(g: PairGroup, t: Option<f64>) -> f64 {
    let (slowest, fastest) = group_rates(g);
    let end = t.unwrap_or(45.0 / -slowest);
    let f = group_fn(g);
    let zeros = sign_changes(&f, end, 2.0 * std::f64::consts::PI / (80.0 * fastest), 1e-14);
    abs_integral(&f, &zeros, end, 1e-13)
}

#[test]
fn modal_sum_reconstructs_the_matrix_exponential() {
    let mut r = rng(11);
    for trial in 0..60 {
        let n = 2 + trial % 4;
        let rs = random_system(&mut r, n, 2, ANY);
        let sys = &rs.sys;
        let eig = eigendecompose_and_classify(sys, DEFAULT_EPS_MULTIPLICITY).unwrap();
        for tau in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let phi = matrix_exponential(sys.a_cl(), tau) * sys.e_mat();
            let scale = phi.amax().max(1.0);
            for k in 0..n {
                for j in 0..2 {
                    let exp = modal_coefficients(sys, &eig, k, j).unwrap();
                    let err = (exp.eval(tau) - phi[(k, j)]).abs();
                    assert!(err < 1e-8 * scale, "trial {trial} τ={tau} k={k} j={j}: {err:e} {:?}", rs.blocks);
                }
            }
        }
    }
}

#[test]
fn groups_match_quadrature() {
    let mut r = rng(23);
    let opts = BoundOptions::default();
    let mut checked = [0usize; 4];
    for trial in 0..200 {
        let n = 3 + trial % 2;
        let rs = random_system(&mut r, n, 1, ANY);
        let z = DisturbanceBounds::new(vec![1.0]).unwrap();
        for t in [None, Some(1.7)] {
            let paired = paired_channels(&rs.sys, trial % n, &z, t, &opts).unwrap();
            for g in &paired[0].groups {
                let analytic = group_bound(g, t, RealPairFormula::SplitAntiderivative).unwrap();
                let truth = group_quadrature(*g, t);
                assert!(
                    rel_err(analytic, truth) < 1e-8 || (analytic - truth).abs() < 1e-13,
                    "trial {trial} t={t:?} {g:?}: {analytic} vs {truth}"
                );
                checked[match g {
                    PairGroup::RealPair { .. } => 0,
                    PairGroup::DoubleRealPair { .. } => 1,
                    PairGroup::ComplexPair { .. } => 2,
                    PairGroup::Singleton { .. } => 3,
                }] += 1;
            }
        }
    }
    assert!(checked.iter().all(|c| *c > 20), "{checked:?}");
}

#[test]
fn state_permutation_permutes_bounds() {
    let mut r = rng(5);
    for _ in 0..30 {
        let rs = random_system(&mut r, 4, 1, SIMPLE);
        let perm = [2usize, 0, 3, 1];
        let p = DMatrix::from_fn(4, 4, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let permuted = ClosedLoopSystem::new(&p * rs.sys.a_cl() * p.transpose(), &p * rs.sys.e_mat()).unwrap();
        let z = DisturbanceBounds::new(vec![0.4]).unwrap();
        for i in 0..4 {
            for t in [None, Some(2.0)] {
                let a = total_bound(&permuted, i, &z, t, PairingStrategy::Default).unwrap().value;
                let b = total_bound(&rs.sys, perm[i], &z, t, PairingStrategy::Default).unwrap().value;
                assert!(rel_err(a, b) < 1e-9, "{a} {b}");
            }
        }
    }
}

#[test]
fn bound_grows_with_horizon() {
    let mut r = rng(8);
    for _ in 0..30 {
        let rs = random_system(&mut r, 3, 2, ANY);
        let z = DisturbanceBounds::new(vec![0.2, 0.5]).unwrap();
        let mut prev = 0.0;
        for i in 0..=60 {
            let t = 0.25 * i as f64;
            let b = total_bound(&rs.sys, 0, &z, Some(t), PairingStrategy::Default).unwrap().value;
            assert!(b >= prev - 1e-12 * b.max(1.0), "t={t}: {b} < {prev}");
            prev = b;
        }
        let inf = total_bound(&rs.sys, 0, &z, None, PairingStrategy::Default).unwrap().value;
        let far = total_bound(&rs.sys, 0, &z, Some(200.0), PairingStrategy::Default).unwrap().value;
        assert!(prev <= inf * (1.0 + 1e-12) + 1e-15);
        assert!(rel_err(far, inf) < 1e-9);
    }
}

#[test]
fn scaling_laws() {
    let mut r = rng(99);
    for _ in 0..30 {
        let rs = random_system(&mut r, 3, 1, ANY);
        let z = DisturbanceBounds::new(vec![0.3]).unwrap();
        let base = total_bound(&rs.sys, 1, &z, None, PairingStrategy::Default).unwrap().value;
        let z2 = DisturbanceBounds::new(vec![0.3 * 2.5]).unwrap();
        let amp = total_bound(&rs.sys, 1, &z2, None, PairingStrategy::Default).unwrap().value;
        assert!(rel_err(amp, 2.5 * base) < 1e-12);
        // A → βA speeds time up by β: every group integral shrinks by 1/β
        let beta = 3.0;
        let fast = ClosedLoopSystem::new(rs.sys.a_cl() * beta, rs.sys.e_mat().clone()).unwrap();
        let scaled = total_bound(&fast, 1, &z, None, PairingStrategy::Default).unwrap().value;
        assert!(rel_err(scaled, base / beta) < 1e-9, "{scaled} {}", base / beta);
        let finite = total_bound(&rs.sys, 1, &z, Some(1.2), PairingStrategy::Default).unwrap().value;
        let finite_fast = total_bound(&fast, 1, &z, Some(1.2 / beta), PairingStrategy::Default).unwrap().value;
        assert!(rel_err(finite_fast, finite / beta) < 1e-9);
    }
}

#[test]
fn optimal_pairing_never_loosens() {
    let mut r = rng(31);
    let z = DisturbanceBounds::new(vec![1.0]).unwrap();
    for _ in 0..40 {
        let rs = random_system(&mut r, 5, 1, common::Mix { double: false, complex: false });
        for t in [None, Some(1.5)] {
            let d = total_bound(&rs.sys, 0, &z, t, PairingStrategy::Default).unwrap().value;
            let o = total_bound(&rs.sys, 0, &z, t, PairingStrategy::Optimal).unwrap().value;
            assert!(o <= d * (1.0 + 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distinct_real_pair_matches_quadrature(
        c_i in -3.0f64..3.0, c_j in -3.0f64..3.0, l_i in -4.0f64..-0.2, gap in 0.05f64..3.0, t in 0.0f64..8.0,
    ) {
        let l_j = l_i - gap;
        let w = RealPairWork::new(c_i, c_j, l_i, l_j);
        let g = PairGroup::RealPair { c_i, c_j, lambda_i: l_i, lambda_j: l_j, terms: [0, 1] };
        for h in [None, Some(t)] {
            let a = bound_distinct_real_pair(&w, h).unwrap();
            let q = group_quadrature(g, h);
            prop_assert!(rel_err(a, q) < 1e-8 || (a - q).abs() < 1e-14, "{a} {q}");
        }
    }

    #[test]
    fn double_real_pair_matches_quadrature(
        c_i in -3.0f64..3.0, c_ip1 in -3.0f64..3.0, l in -4.0f64..-0.2, t in 0.0f64..8.0,
    ) {
        let w = DoubleRealWork::new(c_i, c_ip1, l);
        let g = PairGroup::DoubleRealPair { c_i, c_ip1, lambda: l, terms: [0, 1] };
        for h in [None, Some(t)] {
            let a = bound_double_real_pair(&w, h).unwrap();
            let q = group_quadrature(g, h);
            prop_assert!(rel_err(a, q) < 1e-8 || (a - q).abs() < 1e-14, "{a} {q}");
        }
    }

    #[test]
    fn complex_pair_matches_quadrature(
        re in -3.0f64..3.0, im in -3.0f64..3.0, sigma in -3.0f64..-0.05, omega in 0.2f64..6.0, t in 0.0f64..8.0,
    ) {
        prop_assume!(re.abs() + im.abs() > 1e-3);
        let c = Complex::new(re, im);
        let w = ComplexPairWork::new(c, sigma, omega).unwrap();
        let g = PairGroup::ComplexPair { c, sigma, omega, terms: [0, 1] };
        for h in [None, Some(t)] {
            let a = bound_complex_pair(&w, h).unwrap();
            let q = group_quadrature(g, h);
            prop_assert!(rel_err(a, q) < 1e-8 || (a - q).abs() < 1e-14, "{a} {q}");
        }
    }
}

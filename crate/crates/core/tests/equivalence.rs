//! Batch checks of the two-sided equivalences that come without constants:
//! Orlicz vs GLS norms, B(φ) vs GLS norms, and the one-sided associate
//! bound through the conjugate Orlicz norm.

use gls_core::bphi::{membership_check, LambdaGrid, PhiFunction, RandomVariableSample};
use gls_core::duality::{theorem41_bound_check_with, OracleOptions};
use gls_core::orlicz::{build_n, embedding_batch, OrliczPair, TableSpec};
use gls_core::search::ScanSpec;
use gls_core::{DiscreteMeasureSpace, MeasurableFunction, PsiFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_probability_space(rng: &mut ChaCha8Rng, atoms: usize) -> DiscreteMeasureSpace {
    DiscreteMeasureSpace::normalized((0..atoms).map(|_| rng.gen_range(0.05..1.0)).collect()).unwrap()
}

fn random_function(rng: &mut ChaCha8Rng, atoms: usize) -> MeasurableFunction {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    MeasurableFunction::new((0..atoms).map(|_| scale * rng.gen_range(-3.0..3.0)).collect()).unwrap()
}

#[test]
fn orlicz_and_gls_norms_are_equivalent_for_psi2() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let psi = PsiFunction::power(2.0).unwrap();
    let n = build_n(&psi).unwrap();
    let samples: Vec<_> = (0..200)
        .map(|_| {
            let s = random_probability_space(&mut rng, 16);
            (random_function(&mut rng, 16), s)
        })
        .collect();
    let batch = embedding_batch(&samples, &psi, &n, &ScanSpec::default()).unwrap();
    assert_eq!(batch.count, 200);
    assert!(batch.spread <= 20.0, "{batch:?}");
}

#[test]
fn associate_norm_is_bounded_by_conjugate_orlicz_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let psi = PsiFunction::power(2.0).unwrap();
    let pair = OrliczPair::build(&psi, &TableSpec::default()).unwrap();
    let samples: Vec<_> = (0..200)
        .map(|_| {
            let s = random_probability_space(&mut rng, 8);
            (random_function(&mut rng, 8), s)
        })
        .collect();
    let c_psi = embedding_batch(&samples, &psi, &pair.n, &ScanSpec::default())
        .unwrap()
        .c_high;
    let opts = OracleOptions::default();
    for _ in 0..20 {
        let s = random_probability_space(&mut rng, 8);
        let g = random_function(&mut rng, 8);
        let rep = theorem41_bound_check_with(&g, &psi, &pair, &s, c_psi, &opts).unwrap();
        assert!(rep.pass, "{rep:?}");
        let doubled =
            theorem41_bound_check_with(&g.scaled(2.0).unwrap(), &psi, &pair, &s, c_psi, &opts).unwrap();
        assert_eq!(rep.pass, doubled.pass);
    }
}

#[test]
fn bphi_and_gls_norms_are_equivalent_on_two_point_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let phi = PhiFunction::quadratic();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..50 {
        let q: f64 = rng.gen_range(0.01..0.99);
        let a = rng.gen_range(0.1..10.0);
        // a with probability q, -a q/(1-q) otherwise: mean zero.
        let values = MeasurableFunction::new(vec![a, -a * q / (1.0 - q)]).unwrap();
        let s = DiscreteMeasureSpace::normalized(vec![q, 1.0 - q]).unwrap();
        let xi = RandomVariableSample::new(values, s).unwrap();
        let m = membership_check(&xi, &phi, &LambdaGrid::default(), &ScanSpec::default()).unwrap();
        assert!(m.bphi_norm.is_finite() && m.gls_norm.is_finite());
        let r = m.ratio.unwrap();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    assert!(lo >= 0.1 && hi <= 10.0, "ratio range [{lo}, {hi}]");
}

#[test]
fn zero_variable_has_zero_norms() {
    let xi = RandomVariableSample::new(
        MeasurableFunction::zeros(3),
        DiscreteMeasureSpace::uniform(3).unwrap(),
    )
    .unwrap();
    let m = membership_check(&xi, &PhiFunction::quadratic(), &LambdaGrid::default(), &ScanSpec::default())
        .unwrap();
    assert_eq!((m.bphi_norm, m.gls_norm, m.ratio), (0.0, 0.0, None));
}

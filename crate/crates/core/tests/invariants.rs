use lorentz_embed::levy::{build_representation, decide_embeddable, eval_representation, max2_via_levy};
use lorentz_embed::lorentz::lorentz_qnorm_pow;
use lorentz_embed::posdef::{gram_min_eig, witness_search, KernelSpec, DEFAULT_BUDGET};
use lorentz_embed::{Exponent, Weights};
use proptest::prelude::*;

fn q(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn kernel(a: &[f64], qv: f64) -> KernelSpec {
    KernelSpec::new(Weights::new(a.to_vec()).unwrap(), q(qv)).unwrap()
}

#[test]
fn max2_near_q_one() {
    for (x, y) in [(1.0, 0.0), (2.0, -1.0), (0.3, 0.3), (-1.5, 2.5)] {
        let got = max2_via_levy(q(0.99), x, y).unwrap();
        let want = f64::max(f64::abs(x), f64::abs(y)).powf(0.99);
        assert!((got - want).abs() <= 2e-2 * want, "({x},{y}): {got} vs {want}");
    }
}

#[test]
fn witness_for_two_weights_above_one() {
    let s = witness_search(&kernel(&[2.0, 1.0], 1.5), DEFAULT_BUDGET, 3).unwrap();
    assert!(s.found, "best {}", s.best_relative_eigenvalue);
}

#[test]
fn positive_definite_kernels_exhaust_the_search() {
    let s = witness_search(&kernel(&[1.0, 1.0], 1.0), 20_000, 4).unwrap();
    assert!(!s.found);
    assert!(s.evaluations <= 20_000);
    let s = witness_search(&kernel(&[1.0, 1.0, 1.0, 1.0], 2.0), 20_000, 4).unwrap();
    assert!(!s.found);
}

#[test]
fn witness_survives_rescaling() {
    let k = kernel(&[4.0, 2.0, 1.0], 1.0);
    let s = witness_search(&k, DEFAULT_BUDGET, 5).unwrap();
    let pts = s.witness.unwrap().witness_points.unwrap();
    for lambda in [0.25, 3.0, 40.0] {
        let scaled = kernel(&[4.0 * lambda, 2.0 * lambda, lambda], 1.0);
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|c| c / lambda).collect()).collect();
        let r = gram_min_eig(&scaled, &moved).unwrap();
        assert!(r.refuted, "lambda {lambda}: {}", r.relative_min_eigenvalue);
    }
}

fn ap_weights() -> impl Strategy<Value = Vec<f64>> {
    (1usize..=5, 0.0f64..3.0, 0.0f64..2.0)
        .prop_filter("positive", |(_, last, step)| last + step > 0.1)
        .prop_map(|(n, last, step)| (0..n).map(|k| last + step * (n - 1 - k) as f64).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn representation_reproduces_norm(a in ap_weights(), qi in 0usize..3, x in prop::collection::vec(-3.0f64..3.0, 5)) {
        let qv = [0.4, 0.8, 1.0][qi];
        let w = Weights::new(a.clone()).unwrap();
        prop_assume!(decide_embeddable(&w, q(qv), 1e-9).unwrap().verdict);
        let rep = build_representation(&w, q(qv), 1e-9).unwrap();
        let x = &x[..a.len()];
        let want = lorentz_qnorm_pow(&w, q(qv), x).unwrap();
        let got = eval_representation(&rep, x).unwrap();
        prop_assert!((got - want).abs() <= 1e-3 * want.max(1e-12));
    }

    #[test]
    fn max2_is_symmetric_and_homogeneous(x in -5.0f64..5.0, y in -5.0f64..5.0, t in 0.1f64..4.0) {
        let qv = 0.6;
        let a = max2_via_levy(q(qv), x, y).unwrap();
        prop_assert!((a - max2_via_levy(q(qv), y, -x).unwrap()).abs() <= 1e-9 * a.max(1e-12));
        let b = max2_via_levy(q(qv), t * x, t * y).unwrap();
        prop_assert!((b - t.powf(qv) * a).abs() <= 1e-9 * b.max(1e-12));
    }
}

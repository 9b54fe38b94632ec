//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lorentz_embed::expansion::{coefficients_for_exact, expand_with, expansion_coefficients};
use lorentz_embed::fourier::{ft_max_power, ft_pairing_oracle, BumpSpec, PairingOptions, DEFAULT_G_TOL};
use lorentz_embed::levy::{
    build_representation, decide_embeddable, decide_function_space, eval_representation, mass_near_singularity,
    max2_q1, max2_via_levy, smoothness_defect, smoothness_slopes, FunctionWeight, Interval,
};
use lorentz_embed::lorentz::{lorentz_norm1_exact, lorentz_qnorm_pow};
use lorentz_embed::posdef::{schoenberg_decision_oracle, witness_search, KernelSpec, CONSISTENT_TOL, DEFAULT_BUDGET};
use lorentz_embed::zonotope::{
    is_centrally_symmetric, permuted_triple_face, support_function_exact, zonotope_generators, FaceShape,
};
use lorentz_embed::{Exponent, Weights};

type Outcome = Result<String, String>;

fn q(v: f64) -> Exponent {
    Exponent::new(v).unwrap()
}

fn ri(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fs: [(&str, fn(f64) -> f64); 4] = [
        ("|t|^0.5", |t| t.abs().powf(0.5)),
        ("|t|^1.3", |t| t.abs().powf(1.3)),
        ("t^2", |t| t * t),
        ("cos t", f64::cos),
    ];
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let n = rng.random_range(1..=8);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
        let f = fs[i % 4].1;
        let mut sorted: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        sorted.sort_by(|u, v| v.total_cmp(u));
        let terms: Vec<f64> = a.iter().zip(&sorted).map(|(ak, xk)| ak * f(*xk)).collect();
        let lhs: f64 = terms.iter().sum();
        let scale = terms.iter().map(|t| t.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let rhs = expand_with(&a, &f, &x).map_err(|e| e.to_string())?;
        worst = worst.max((lhs - rhs).abs() / scale);
    }
    let t = start.elapsed();
    check(
        worst <= 1e-10 && within(t, 10),
        format!("1000 instances, max relative deviation {worst:.2e} (tol 1e-10), {:.2}s", t.as_secs_f64()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    for _ in 0..200 {
        let n = rng.random_range(3..=12);
        let alpha = BigRational::new(BigInt::from(rng.random_range(0..40)), BigInt::from(rng.random_range(1..9)));
        let beta = BigRational::new(BigInt::from(rng.random_range(0..40)), BigInt::from(rng.random_range(1..9)));
        let u = ri(1000);
        let mut a: Vec<BigRational> = (0..n - 1).map(|k| &u - &alpha * ri(k as i64)).collect();
        let last = &a[n - 2] - &beta;
        a.push(last);
        let w = Weights::from_rationals(a.clone()).unwrap();
        let c = expansion_coefficients(&w).exact.unwrap();
        // independent evaluation of the defining sum
        let direct = coefficients_for_exact(&a);
        for k in 3..=n {
            let want = if k % 2 == 0 { &beta - &alpha } else { &alpha - &beta };
            if c[k - 1] != want || direct[k - 1] != want {
                failures += 1;
            }
        }
    }
    let t = start.elapsed();
    check(
        failures == 0 && within(t, 1),
        format!("200 weight vectors, {failures} coefficient mismatches (exact), {:.3}s", t.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for qv in [0.5, 1.0, 1.5, 3.0] {
        let a = ft_max_power(q(qv), &[3.0, 1.0, 1.0], DEFAULT_G_TOL).map_err(|e| e.to_string())?;
        let b = ft_max_power(q(qv), &[3.0, 2.0, 2.0], DEFAULT_G_TOL).map_err(|e| e.to_string())?;
        ok &= a * b < 0.0;
        parts.push(format!("q={qv}: {a:+.4e} vs {b:+.4e}"));
    }
    let t = start.elapsed();
    check(ok && within(t, 1), format!("{}; {:.3}s", parts.join(", "), t.as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let bumps = [
        BumpSpec::cube([3.0, 1.0, 1.0], 0.2),
        BumpSpec::cube([3.0, 2.0, 2.0], 0.2),
        BumpSpec::cube([0.5, 2.5, 1.0], 0.15),
    ];
    let opts = PairingOptions::default();
    let mut worst = 0.0f64;
    for qv in [0.5, 1.0] {
        for b in &bumps {
            let r = ft_pairing_oracle(q(qv), b, &opts).map_err(|e| e.to_string())?;
            worst = worst.max(r.rel_err);
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-2 && within(t, 300),
        format!("6 pairings, max |lhs-rhs|/|rhs| = {worst:.2e} (tol 1e-2), {:.1}s", t.as_secs_f64()),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let grid = [-3.0, -1.2, 0.0, 0.7, 3.0];
    let mut worst = 0.0f64;
    for qv in [0.3, 0.5, 0.9] {
        for &x in &grid {
            for &y in &grid {
                let got = max2_via_levy(q(qv), x, y).map_err(|e| e.to_string())?;
                let want = x.abs().max(y.abs()).powf(qv);
                let err = if want == 0.0 { got.abs() } else { (got - want).abs() / want };
                worst = worst.max(err);
            }
        }
    }
    let probe = mass_near_singularity(q(1.5), 4.0, 16).map_err(|e| e.to_string())?;
    let ratios = probe.increment_ratios();
    let doubling = ratios.iter().rev().take_while(|r| (**r - 2.0).abs() <= 0.05).count();
    let t = start.elapsed();
    check(
        worst <= 1e-4 && doubling >= 10 && within(t, 60),
        format!(
            "max relative error {worst:.2e} (tol 1e-4); q=1.5 mass doubles for {doubling} consecutive refinements \
             (final mass {:.3e}); {:.2}s",
            probe.mass.last().unwrap(),
            t.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_ulps = 0u64;
    for _ in 0..10_000 {
        let x: f64 = rng.random_range(-1e3..1e3);
        let y: f64 = rng.random_range(-1e3..1e3);
        let got = max2_q1(x, y);
        let want = x.abs().max(y.abs());
        let ulps = (got.to_bits() as i64 - want.to_bits() as i64).unsigned_abs();
        worst_ulps = worst_ulps.max(ulps);
    }
    check(worst_ulps <= 1, format!("10000 pairs, max deviation {worst_ulps} ulp (tol 1 rounding)"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(1..=5);
        let step = rng.random_range(0..4i64);
        let last = rng.random_range(if step == 0 { 1 } else { 0 }..4i64);
        let v: Vec<i64> = (0..n).map(|k| last + step * (n - 1 - k) as i64).collect();
        let w = Weights::from_integers(&v).unwrap();
        for qv in [0.5, 1.0] {
            let rep = build_representation(&w, q(qv), 1e-9).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let want = lorentz_qnorm_pow(&w, q(qv), &x).unwrap();
                let got = eval_representation(&rep, &x).map_err(|e| e.to_string())?;
                worst = worst.max((got - want).abs() / want.max(1e-300));
            }
        }
    }
    let t = start.elapsed();
    check(
        worst <= 1e-3 && within(t, 300),
        format!("20 weight vectors x 2 exponents x 100 points, max relative error {worst:.2e} (tol 1e-3), {:.1}s", t.as_secs_f64()),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let ints = |v: &[i64]| Weights::from_integers(v).unwrap();
    let seq_table: [(&[i64], f64, bool); 10] = [
        (&[3, 2, 1], 0.5, true),
        (&[4, 2, 1], 1.0, false),
        (&[2, 1], 0.7, true),
        (&[2, 2], 1.7, true),
        (&[2, 1], 1.7, false),
        (&[5, 4, 3, 2, 1], 1.0, true),
        (&[1, 1, 1], 2.0, true),
        (&[3, 2, 1], 1.5, false),
        (&[3, 3, 3, 3], 3.0, true),
        (&[6, 4, 2, 1], 0.3, false),
    ];
    let mut wrong = Vec::new();
    for (v, qv, want) in seq_table {
        let d = decide_embeddable(&ints(v), q(qv), 1e-9).map_err(|e| e.to_string())?;
        if d.verdict != want {
            wrong.push(format!("{v:?} q={qv}"));
        }
    }
    let levels = [2, 3, 5, 7];
    let mut fun_table: Vec<(String, FunctionWeight, f64, bool)> = Vec::new();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        for qv in [0.5, 1.0, 1.5] {
            fun_table.push((format!("w_{alpha}"), FunctionWeight::linear(alpha), qv, qv <= 1.0 || alpha == 0.0));
        }
    }
    for qv in [0.5, 1.0] {
        fun_table.push(("0.5 t^-0.5".into(), FunctionWeight::power(0.5), qv, false));
    }
    for qv in [0.5, 1.0, 1.5] {
        fun_table.push(("1 on (0,inf)".into(), FunctionWeight::constant(1.0, Interval::HalfLine), qv, true));
    }
    fun_table.push((
        "e^-t on (0,inf)".into(),
        FunctionWeight::custom(|t| (-t).exp(), Interval::HalfLine),
        0.5,
        false,
    ));
    for (name, w, qv, want) in &fun_table {
        let d = decide_function_space(w, q(*qv), &levels, 1e-9).map_err(|e| e.to_string())?;
        if d.verdict != *want {
            wrong.push(format!("{name} q={qv}"));
        }
    }
    let t = start.elapsed();
    check(
        wrong.is_empty() && within(t, 10),
        format!(
            "{} sequence and {} function-space instances, mismatches: {:?}, {:.2}s",
            seq_table.len(),
            fun_table.len(),
            wrong,
            t.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut vectors = Vec::new();
    for n in 1..=5i64 {
        for last in 1..=5i64 {
            for step in 0..=4i64 {
                if last + step * (n - 1) <= 5 && (step == 0 || n > 1) {
                    vectors.push((0..n).map(|k| last + step * (n - 1 - k)).collect::<Vec<i64>>());
                }
            }
        }
    }
    let mut mismatches = 0;
    for v in &vectors {
        let w = Weights::from_integers(v).unwrap();
        let gens = zonotope_generators(&w).map_err(|e| e.to_string())?;
        let a = w.to_rationals();
        for _ in 0..1000 {
            let x: Vec<BigRational> = (0..v.len())
                .map(|_| BigRational::new(BigInt::from(rng.random_range(-60..=60)), BigInt::from(rng.random_range(1..=12))))
                .collect();
            if support_function_exact(&gens, &x).unwrap() != lorentz_norm1_exact(&a, &x).unwrap() {
                mismatches += 1;
            }
        }
    }
    let mut face_disagree = 0;
    let mut triples = 0;
    while triples < 100 {
        let mut t: Vec<i64> = (0..3).map(|_| rng.random_range(1..=12)).collect();
        t.sort_unstable_by(|x, y| y.cmp(x));
        if t[0] == t[2] {
            continue;
        }
        triples += 1;
        let face = permuted_triple_face(&Weights::from_integers(&t).unwrap()).map_err(|e| e.to_string())?;
        let sym = is_centrally_symmetric(&face);
        let decided = decide_embeddable(&Weights::from_integers(&t).unwrap(), q(1.0), 0.0).unwrap().verdict;
        let shape_ok = (face.shape() == FaceShape::Hexagon) == (t[0] != t[1] && t[1] != t[2]);
        if sym != decided || !shape_ok {
            face_disagree += 1;
        }
    }
    let t = start.elapsed();
    check(
        mismatches == 0 && face_disagree == 0 && within(t, 30),
        format!(
            "{} AP weight vectors x 1000 rational points: {mismatches} mismatches; 100 triples: {face_disagree} \
             classifier disagreements; {:.2}s",
            vectors.len(),
            t.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let spec = |a: &[f64], qv: f64| KernelSpec::new(Weights::new(a.to_vec()).unwrap(), q(qv)).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (a, qv) in [(&[3.0, 2.0, 1.0][..], 0.5), (&[1.0, 1.0, 1.0][..], 1.7), (&[2.0, 1.0][..], 1.0)] {
        let v = schoenberg_decision_oracle(&spec(a, qv), 200, 10).map_err(|e| e.to_string())?;
        let good = v.consistent && v.min_relative_eigenvalue >= -CONSISTENT_TOL;
        ok &= good;
        parts.push(format!("{a:?} q={qv}: min {:.1e}", v.min_relative_eigenvalue));
    }
    for (a, qv) in [(&[1.0, 0.0, 0.0][..], 1.0), (&[1.0, 0.0, 0.0][..], 0.5), (&[4.0, 2.0, 1.0][..], 1.0)] {
        let s = witness_search(&spec(a, qv), DEFAULT_BUDGET, 10).map_err(|e| e.to_string())?;
        let certified = s
            .witness
            .as_ref()
            .is_some_and(|w| w.refuted && w.quadratic_form / w.norm < -1e-6);
        ok &= certified;
        parts.push(format!(
            "{a:?} q={qv}: witness {} ({:.1e}, {} evals)",
            if certified { "found" } else { "missing" },
            s.best_relative_eigenvalue,
            s.evaluations
        ));
    }
    let t = start.elapsed();
    check(ok && within(t, 600), format!("{}; {:.1}s", parts.join("; "), t.as_secs_f64()))
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut bad = 0;
    let mut constant = 0;
    for i in 0..100 {
        let n = rng.random_range(2..=6);
        let mut v: Vec<i64> = if i % 4 == 0 {
            vec![rng.random_range(1..=10); n]
        } else {
            (0..n).map(|_| rng.random_range(1..=10)).collect()
        };
        v.sort_unstable_by(|x, y| y.cmp(x));
        let is_const = v.iter().all(|x| *x == v[0]);
        constant += is_const as usize;
        let w = Weights::from_integers(&v).unwrap();
        for qv in [1.5, 2.0, 4.0] {
            let d = smoothness_defect(&w, q(qv)).map_err(|e| e.to_string())?;
            let (l, r) = smoothness_slopes(&w, q(qv), 1e-5).map_err(|e| e.to_string())?;
            let kink = (l - r).abs() > 1e-6 * l.abs().max(1.0);
            if (d == 0.0) != is_const || kink != (d > 0.0) {
                bad += 1;
            }
        }
    }
    let t = start.elapsed();
    check(
        bad == 0 && within(t, 10),
        format!("100 weight vectors ({constant} constant) x 3 exponents, {bad} disagreements, {:.2}s", t.as_secs_f64()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("order-statistic expansion identity", criterion_1),
        ("coefficient law for perturbed progressions", criterion_2),
        ("sign opposition at (3,1,1) and (3,2,2)", criterion_3),
        ("distributional pairing against bumps in G", criterion_4),
        ("two-variable max reconstruction and q>1 divergence", criterion_5),
        ("q=1 max split", criterion_6),
        ("representation certificate", criterion_7),
        ("decision tables", criterion_8),
        ("zonotope support identity and face classifier", criterion_9),
        ("positive-definiteness suite", criterion_10),
        ("smoothness defect", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

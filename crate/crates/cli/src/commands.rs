use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lorentz_embed::expansion::{
    expand, expansion_coefficients, higher_coefficients_vanish, order_statistic_sum, transform_constant,
};
use lorentz_embed::fourier::{
    ft_max_power, ft_pairing_oracle, sign_scan, write_scan_csv, BumpSpec, FrequencyPoint, PairingOptions,
};
use lorentz_embed::io::read_points;
use lorentz_embed::levy::{
    build_representation, decide_embeddable, decide_function_space, eval_representation, mass_near_singularity,
    max2_q1, max2_via_levy_detailed, FunctionWeight,
};
use lorentz_embed::lorentz::lorentz_qnorm_pow;
use lorentz_embed::posdef::{gram_min_eig, schoenberg_decision_oracle, witness_search, KernelSpec};
use lorentz_embed::zonotope::{
    dual_extreme_points, face_kinds_report, is_centrally_symmetric, permuted_triple_face, support_function_exact,
    vertex_count, zonotope_generators,
};
use lorentz_embed::{lorentz::lorentz_norm1_exact, Error, Exponent, Result, Weights};

use crate::args::relaxed_json;
use crate::{Cli, Command, DecideCommand, FtCommand, LevyCommand, PosdefCommand, ZonoCommand};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
}

impl From<bool> for Verdict {
    fn from(b: bool) -> Self {
        if b {
            Verdict::Yes
        } else {
            Verdict::No
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub result: Value,
    pub verdict: Verdict,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(result: Value, verdict: impl Into<Verdict>) -> Self {
        Self {
            result,
            verdict: verdict.into(),
            csv: None,
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

/// Exact weights as strings (`"3"`, `"1/3"`); these re-parse to the same values.
fn weights_json(w: &Weights) -> Value {
    Value::from(w.to_rationals().iter().map(|r| r.to_string()).collect::<Vec<_>>())
}

fn rationals_json(v: &[BigRational]) -> Value {
    Value::from(v.iter().map(|r| r.to_string()).collect::<Vec<_>>())
}

fn exponent(q: f64) -> Result<Exponent> {
    Exponent::new(q)
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Coeffs { weights } => coeffs(&weights.load()?),
        Command::ExpandCheck { weights, x, f } => {
            let w = weights.load()?;
            let lhs = order_statistic_sum(w.values(), &|t| f.eval(t), x)?;
            let rhs = expand(&w, &|t| f.eval(t), x)?;
            let diff = (lhs - rhs).abs();
            let rel = diff / lhs.abs().max(f64::MIN_POSITIVE);
            Ok(Outcome::new(
                json!({
                    "weights": weights_json(&w),
                    "x": x,
                    "f": f,
                    "lhs": lhs,
                    "rhs": rhs,
                    "difference": diff,
                    "relative_difference": rel,
                }),
                rel <= 1e-10 || diff <= 1e-300,
            ))
        }
        Command::Ft(c) => ft(cli, c),
        Command::Levy(c) => levy(cli, c),
        Command::Decide(c) => decide(cli, c),
        Command::Zono(c) => zono(cli, c),
        Command::Posdef(c) => posdef(cli, c),
    }
}

fn coeffs(w: &Weights) -> Result<Outcome> {
    let c = expansion_coefficients(w);
    Ok(Outcome::new(
        json!({
            "weights": weights_json(w),
            "coefficients": c.values,
            "exact_coefficients": c.exact.as_deref().map(rationals_json),
            "transform_constant": transform_constant(w),
            "higher_coefficients_vanish": c.exact.as_deref().map(higher_coefficients_vanish),
        }),
        true,
    ))
}

fn ft(cli: &Cli, c: &FtCommand) -> Result<Outcome> {
    match c {
        FtCommand::Eval { q, xi } => {
            let fp = FrequencyPoint::new(xi.clone())?;
            let value = ft_max_power(exponent(*q)?, xi, cli.g_tol)?;
            Ok(Outcome::new(
                json!({
                    "q": q,
                    "xi": xi,
                    "value": value,
                    "margin_axes": fp.margin_axes,
                    "margin_diag": fp.margin_diag,
                }),
                true,
            ))
        }
        FtCommand::Scan { q, bounds, grid, out } => {
            let scan = sign_scan(exponent(*q)?, *bounds, *grid, cli.g_tol)?;
            let mut buf = Vec::new();
            write_scan_csv(&scan, &mut buf)?;
            let csv = String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?;
            if let Some(p) = out {
                std::fs::write(p, &csv)?;
            }
            let mut o = Outcome::new(
                json!({
                    "q": q,
                    "box": bounds,
                    "grid": grid,
                    "samples": scan.samples.len(),
                    "positive": scan.positive,
                    "negative": scan.negative,
                    "both_signs": scan.both_signs,
                    "csv": out,
                }),
                true,
            );
            o.csv = Some(csv);
            Ok(o)
        }
        FtCommand::Pairing {
            q,
            center,
            radius,
            tail_budget,
            quad_tol,
            accept,
        } => {
            let center: [f64; 3] = center
                .as_slice()
                .try_into()
                .map_err(|_| Error::InvalidInput("center needs 3 coordinates".into()))?;
            let radius: [f64; 3] = match radius.as_slice() {
                [r] => [*r; 3],
                [a, b, c] => [*a, *b, *c],
                _ => return Err(Error::InvalidInput("radius needs 1 or 3 values".into())),
            };
            let opts = PairingOptions {
                tail_budget_rel: *tail_budget,
                quad_abs_tol: *quad_tol,
                g_tol: cli.g_tol,
                ..PairingOptions::default()
            };
            let report = ft_pairing_oracle(exponent(*q)?, &BumpSpec { center, radius }, &opts)?;
            let ok = report.rel_err <= *accept;
            Ok(Outcome::new(to_value(&report)?, ok))
        }
    }
}

fn levy(cli: &Cli, c: &LevyCommand) -> Result<Outcome> {
    match c {
        LevyCommand::Check {
            q,
            x,
            y,
            accept,
            refinements,
        } => {
            let qe = exponent(*q)?;
            let expected = x.abs().max(y.abs()).powf(*q);
            if *q > 1.0 {
                let shrink = 2f64.powf(1.0 / (q - 1.0)).min(1e6);
                let probe = mass_near_singularity(qe, shrink, *refinements)?;
                let ratios = probe.increment_ratios();
                return Ok(Outcome::new(
                    json!({
                        "q": q,
                        "method": "divergent",
                        "note": "the density is not integrable at xi = 1 for q > 1",
                        "probe": probe,
                        "increment_ratios": ratios,
                    }),
                    false,
                ));
            }
            let (value, err, method) = if *q == 1.0 {
                (max2_q1(*x, *y), 0.0, "split")
            } else {
                let r = max2_via_levy_detailed(qe, *x, *y)?;
                (r.value, r.abs_err, "density")
            };
            let rel = if expected == 0.0 {
                value.abs()
            } else {
                (value - expected).abs() / expected
            };
            Ok(Outcome::new(
                json!({
                    "q": q,
                    "x": x,
                    "y": y,
                    "method": method,
                    "value": value,
                    "quadrature_error": err,
                    "expected": expected,
                    "relative_error": rel,
                }),
                rel <= *accept,
            ))
        }
        LevyCommand::Repr { weights, q, samples } => {
            let w = weights.load()?;
            let qe = exponent(*q)?;
            let rep = match build_representation(&w, qe, cli.tol) {
                Ok(r) => r,
                Err(e @ (Error::NotArithmeticProgression { .. } | Error::InvalidExponent(_))) => {
                    return Ok(Outcome::new(
                        json!({
                            "weights": weights_json(&w),
                            "q": q,
                            "representation": Value::Null,
                            "reason": e.to_string(),
                        }),
                        false,
                    ));
                }
                Err(e) => return Err(e),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut worst = 0.0f64;
            for _ in 0..*samples {
                let x: Vec<f64> = (0..w.len()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let want = lorentz_qnorm_pow(&w, qe, &x)?;
                let got = eval_representation(&rep, &x)?;
                worst = worst.max((got - want).abs() / want.max(f64::MIN_POSITIVE));
            }
            Ok(Outcome::new(
                json!({
                    "weights": weights_json(&w),
                    "q": q,
                    "representation": rep,
                    "samples": samples,
                    "max_relative_error": worst,
                }),
                worst <= 1e-3,
            ))
        }
    }
}

fn decide(cli: &Cli, c: &DecideCommand) -> Result<Outcome> {
    match c {
        DecideCommand::Seq { weights, q } => {
            let w = weights.load()?;
            let d = decide_embeddable(&w, exponent(*q)?, cli.tol)?;
            let mut v = to_value(&d)?;
            v["weights"] = weights_json(&w);
            v["q"] = json!(q);
            Ok(Outcome::new(v, d.verdict))
        }
        DecideCommand::Fun { weight_spec, q, levels } => {
            let raw = relaxed_json(weight_spec).map_err(Error::Parse)?;
            let w: FunctionWeight = serde_json::from_value(raw).map_err(|e| Error::Parse(e.to_string()))?;
            let d = decide_function_space(&w, exponent(*q)?, levels, cli.tol)?;
            let mut v = to_value(&d)?;
            v["weight"] = to_value(&w)?;
            v["q"] = json!(q);
            Ok(Outcome::new(v, d.verdict))
        }
    }
}

fn zono(cli: &Cli, c: &ZonoCommand) -> Result<Outcome> {
    match c {
        ZonoCommand::Vertices { weights, limit } => {
            let w = weights.load()?;
            let v = dual_extreme_points(&w)?;
            let listed: Vec<Value> = v.points().take(*limit).map(|p| rationals_json(&p)).collect();
            Ok(Outcome::new(
                json!({
                    "weights": weights_json(&w),
                    "count": v.len(),
                    "expected_count": vertex_count(&w).to_string(),
                    "truncated": v.len() > *limit,
                    "vertices": listed,
                }),
                true,
            ))
        }
        ZonoCommand::Face { weights, off } => {
            let w = weights.load()?;
            let face = permuted_triple_face(&w)?;
            if let Some(p) = off {
                std::fs::write(p, face.to_off())?;
            }
            let verts: Vec<Value> = face.vertices().iter().map(|v| rationals_json(v)).collect();
            Ok(Outcome::new(
                json!({
                    "weights": weights_json(&w),
                    "shape": face.shape(),
                    "centrally_symmetric": is_centrally_symmetric(&face),
                    "centroid": rationals_json(&face.centroid()),
                    "vertices": verts,
                    "off": off,
                }),
                true,
            ))
        }
        ZonoCommand::Generators { weights } => {
            let w = weights.load()?;
            match zonotope_generators(&w) {
                Ok(g) => {
                    let exact: Vec<Value> = g.generators.iter().map(|g| rationals_json(&g.exact)).collect();
                    Ok(Outcome::new(
                        json!({
                            "weights": weights_json(&w),
                            "dim": g.dim,
                            "generators": exact,
                            "count": g.generators.len(),
                        }),
                        true,
                    ))
                }
                Err(e @ Error::NotArithmeticProgression { .. }) => Ok(Outcome::new(
                    json!({ "weights": weights_json(&w), "generators": Value::Null, "reason": e.to_string() }),
                    false,
                )),
                Err(e) => Err(e),
            }
        }
        ZonoCommand::Check { weights, samples } => {
            let w = weights.load()?;
            let decision = decide_embeddable(&w, exponent(1.0)?, 0.0)?;
            let faces = if w.len() >= 3 {
                match face_kinds_report(&w) {
                    Ok(r) => to_value(&r)?,
                    Err(Error::DegenerateFace(m)) => json!({ "degenerate": m }),
                    Err(e) => return Err(e),
                }
            } else {
                Value::Null
            };
            let mut identity = Value::Null;
            let mut identity_ok = true;
            if decision.verdict {
                let g = zonotope_generators(&w)?;
                let a = w.to_rationals();
                let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                let mut mismatches = 0usize;
                for _ in 0..*samples {
                    let x: Vec<BigRational> = (0..w.len())
                        .map(|_| {
                            BigRational::new(
                                BigInt::from(rng.random_range(-100i64..=100)),
                                BigInt::from(rng.random_range(1i64..=16)),
                            )
                        })
                        .collect();
                    if support_function_exact(&g, &x)? != lorentz_norm1_exact(&a, &x)? {
                        mismatches += 1;
                    }
                }
                identity_ok = mismatches == 0;
                identity = json!({ "samples": samples, "mismatches": mismatches });
            }
            Ok(Outcome::new(
                json!({
                    "weights": weights_json(&w),
                    "arithmetic_progression": decision.verdict,
                    "defect": decision.defect,
                    "faces": faces,
                    "support_identity": identity,
                }),
                decision.verdict && identity_ok,
            ))
        }
    }
}

fn posdef(cli: &Cli, c: &PosdefCommand) -> Result<Outcome> {
    match c {
        PosdefCommand::Gram { weights, q, points } => {
            let k = KernelSpec::new(weights.load()?, exponent(*q)?)?;
            let pts = read_points(points)?;
            let r = gram_min_eig(&k, &pts)?;
            let mut v = to_value(&r)?;
            v["weights"] = weights_json(k.weights());
            v["predicted_positive_definite"] = json!(k.predicted_positive_definite());
            Ok(Outcome::new(v, !r.refuted))
        }
        PosdefCommand::Search { weights, q, budget } => {
            let k = KernelSpec::new(weights.load()?, exponent(*q)?)?;
            let s = witness_search(&k, *budget, cli.seed)?;
            let mut v = to_value(&s)?;
            v["weights"] = weights_json(k.weights());
            v["predicted_positive_definite"] = json!(k.predicted_positive_definite());
            Ok(Outcome::new(v, !s.found))
        }
        PosdefCommand::Oracle { weights, q, trials } => {
            let k = KernelSpec::new(weights.load()?, exponent(*q)?)?;
            let o = schoenberg_decision_oracle(&k, *trials, cli.seed)?;
            let mut v = to_value(&o)?;
            v["weights"] = weights_json(k.weights());
            Ok(Outcome::new(v, o.consistent))
        }
    }
}

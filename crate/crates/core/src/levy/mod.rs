//! Levy representations of Lorentz norms and the embeddability decisions.
//!
//! For arithmetic-progression weights the expansion collapses to
//!
//! ```text
//! ||x||^q = a_n sum_i |x_i|^q + (a_{n-1} - a_n) sum_{i<j} max^q(|x_i|, |x_j|)
//! ```
//!
//! and each `max^q` term has its own representation: for `q < 1`
//!
//! ```text
//! max^q(|x|, |y|) = cot(pi q / 2) / (2 pi) * int |x + y xi|^q gamma(xi) dxi,
//! gamma(xi) = (|xi - 1|^-q - |xi + 1|^-q) / xi
//! ```
//!
//! and for `q = 1` the identity `max(|x|, |y|) = (|x + y| + |x - y|) / 2`.

pub mod decide;
pub mod function_weight;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::{Exponent, Weights};
use crate::quadrature::{Integrator, QuadResult};

pub use decide::{
    ap_defect, constancy_defect, decide_embeddable, decide_sequence_space, smoothness_defect,
    smoothness_slopes, Criterion, EmbeddingDecision, Regime, SequenceDecision, DEFAULT_DECISION_TOL,
};
pub use function_weight::{
    decide_function_space, discretize_function_weight, FunctionSpaceDecision, FunctionWeight,
    Interval, LevelDefect, WeightKind,
};

/// `gamma(xi) = (|xi - 1|^-q - |xi + 1|^-q) / xi`, without the prefactor.
pub fn levy_density_2max(q: Exponent, xi: f64) -> Result<f64> {
    if !xi.is_finite() {
        return Err(Error::NonFinite("density argument".into()));
    }
    if xi == 0.0 || xi.abs() == 1.0 {
        return Err(Error::SingularInput(format!("density is singular at xi = {xi}")));
    }
    Ok(density_unchecked(q.value(), xi))
}

// Stable for all xi != 0, +-1: the difference of powers is written as
// e^b expm1(a - b) with a - b = -q ln(|xi - 1| / |xi + 1|).
fn density_unchecked(q: f64, xi: f64) -> f64 {
    let t = xi.abs();
    let b = -q * (1.0 + t).ln();
    let ratio_m1 = -2.0 * t.min(1.0) / (1.0 + t);
    let diff = b.exp() * (-q * ratio_m1.ln_1p()).exp_m1();
    diff / t
}

/// `cot(pi q / 2) / (2 pi)`, the normalization making the density a
/// probability-free representation of `max^q`.
pub fn stable_prefactor(q: f64) -> f64 {
    1.0 / ((PI * q / 2.0).tan() * 2.0 * PI)
}

fn max2_integrator() -> Integrator {
    Integrator {
        abs_tol: 1e-300,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
    }
}

/// `max^q(|x|, |y|)` reconstructed from the density, `0 < q < 1`.
///
/// The region `|xi| > 1` is mapped onto `|s| < 1` by `xi = 1/s`, which
/// carries `|x + y xi|^q gamma(xi) dxi` to `|x s + y|^q gamma(s) ds`; with
/// the evenness of `gamma` the whole integral becomes
/// `int_0^1 H(s) gamma(s) ds`, `H(s) = sum over +-` of `|x +- y s|^q + |y +- x s|^q`.
/// `[0, 1/2]` is regular; on `[1/2, 1)` the `(1-s)^-q` factor is removed
/// by the power substitution.
pub fn max2_via_levy_detailed(q: Exponent, x: f64, y: f64) -> Result<QuadResult> {
    let qv = q.value();
    if qv >= 1.0 {
        return Err(Error::InvalidExponent(format!(
            "the density representation needs q < 1, got {qv}"
        )));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::NonFinite("max2 arguments".into()));
    }
    if x == 0.0 && y == 0.0 {
        return Ok(QuadResult::zero());
    }
    let h = |s: f64| {
        (x + y * s).abs().powf(qv)
            + (x - y * s).abs().powf(qv)
            + (y + x * s).abs().powf(qv)
            + (y - x * s).abs().powf(qv)
    };
    let mut kinks = Vec::new();
    if y != 0.0 {
        kinks.push((x / y).abs());
    }
    if x != 0.0 {
        kinks.push((y / x).abs());
    }
    let quad = max2_integrator();

    let regular = quad.integrate_with_breaks(|s| h(s) * density_unchecked(qv, s), 0.0, 0.5, &kinks)?;

    // s = 1 - d on [1/2, 1): gamma = d^-q / s - (1 + s)^-q / s
    let g = |d: f64| {
        let s = 1.0 - d;
        h(s) / s * (1.0 - (d / (2.0 - d)).powf(qv))
    };
    let d_kinks: Vec<f64> = kinks.iter().map(|k| 1.0 - k).collect();
    let singular = quad.integrate_power_singular(g, 0.5, qv, &d_kinks)?;

    Ok((regular + singular).scaled(stable_prefactor(qv)))
}

pub fn max2_via_levy(q: Exponent, x: f64, y: f64) -> Result<f64> {
    max2_via_levy_detailed(q, x, y).map(|r| r.value)
}

/// `(|x + y| + |x - y|) / 2`.
pub fn max2_q1(x: f64, y: f64) -> f64 {
    0.5 * ((x + y).abs() + (x - y).abs())
}

/// Partial masses `int_{1+eps_k}^{2} gamma` for shrinking `eps_k`.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceProbe {
    pub q: f64,
    /// `eps_k = shrink^-k`
    pub shrink: f64,
    pub eps: Vec<f64>,
    pub mass: Vec<f64>,
    /// `mass[k+1] - mass[k]`
    pub increments: Vec<f64>,
}

impl DivergenceProbe {
    /// Ratios of consecutive increments; tends to `shrink^(q-1)`.
    pub fn increment_ratios(&self) -> Vec<f64> {
        self.increments.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Measures the mass of `gamma` on `[1 + eps, 2]` as `eps` shrinks
/// geometrically by `shrink` per step.
///
/// Near `xi = 1` the density behaves like `(xi - 1)^-q`, so for `q > 1` each
/// step adds `shrink^(q-1)` times the previous increment; `q <= 1` gives
/// increments that shrink to zero.
pub fn mass_near_singularity(q: Exponent, shrink: f64, refinements: usize) -> Result<DivergenceProbe> {
    if !(shrink > 1.0 && shrink.is_finite()) {
        return Err(Error::InvalidInput("shrink factor must exceed 1".into()));
    }
    let qv = q.value();
    // gamma(1 + h) with h = e^u, times dh = e^u du
    let integrand = |u: f64| {
        let h = u.exp();
        (h.powf(-qv) - (2.0 + h).powf(-qv)) / (1.0 + h) * h
    };
    let quad = Integrator::new(1e-300, 1e-12);
    let mut eps = vec![1.0];
    let mut mass = vec![0.0];
    let mut increments = Vec::new();
    for k in 1..=refinements {
        let hi = eps[k - 1];
        let lo = hi / shrink;
        let piece = quad.integrate(integrand, lo.ln(), hi.ln())?.value;
        eps.push(lo);
        mass.push(mass[k - 1] + piece);
        increments.push(piece);
    }
    Ok(DivergenceProbe {
        q: qv,
        shrink,
        eps,
        mass,
        increments,
    })
}

/// Point mass `mass` at `direction`, contributing `mass * |<x, direction>|^q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub direction: Vec<f64>,
    pub mass: f64,
}

/// `coefficient * max^q(|x_i|, |x_j|)`, realized on the `(i, j)` coordinate plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComponent {
    pub i: usize,
    pub j: usize,
    pub coefficient: f64,
}

/// How each pair component is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairKernel {
    /// `q < 1`: density `gamma` with `prefactor = cot(pi q/2)/(2 pi)`.
    Density { prefactor: f64 },
    /// `q = 1`: masses `1/2` at `e_i + e_j` and `e_i - e_j`.
    HalfSum,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevyRepresentation {
    pub n: usize,
    pub q: f64,
    pub atoms: Vec<Atom>,
    pub pairs: Vec<PairComponent>,
    pub pair_kernel: PairKernel,
}

/// Builds the representation for ordered arithmetic-progression weights and `q <= 1`.
pub fn build_representation(w: &Weights, q: Exponent, tol: f64) -> Result<LevyRepresentation> {
    w.require_ordered()?;
    let qv = q.value();
    if qv > 1.0 {
        return Err(Error::InvalidExponent(format!(
            "no finite representing measure for q = {qv} > 1 unless the weights are constant"
        )));
    }
    let decision = decide_embeddable(w, q, tol)?;
    if !decision.verdict {
        return Err(Error::NotArithmeticProgression {
            defect: decision.relative_defect,
        });
    }
    let n = w.len();
    let a = w.values();
    let a_last = a[n - 1];
    let atoms = (0..n)
        .filter(|_| a_last > 0.0)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            Atom {
                direction: e,
                mass: a_last,
            }
        })
        .collect();
    let beta = match w.exact() {
        Some(e) if n >= 2 => crate::lorentz::rational_to_f64(&(&e[n - 2] - &e[n - 1])),
        _ if n >= 2 => a[n - 2] - a_last,
        _ => 0.0,
    };
    let mut pairs = Vec::new();
    if beta != 0.0 {
        for i in 0..n {
            for j in i + 1..n {
                pairs.push(PairComponent {
                    i,
                    j,
                    coefficient: beta,
                });
            }
        }
    }
    let pair_kernel = if qv == 1.0 {
        PairKernel::HalfSum
    } else {
        PairKernel::Density {
            prefactor: stable_prefactor(qv),
        }
    };
    Ok(LevyRepresentation {
        n,
        q: qv,
        atoms,
        pairs,
        pair_kernel,
    })
}

/// Evaluates the represented `||x||^q`.
pub fn eval_representation(rep: &LevyRepresentation, x: &[f64]) -> Result<f64> {
    if x.len() != rep.n {
        return Err(Error::DimensionMismatch {
            expected: rep.n,
            found: x.len(),
        });
    }
    let q = Exponent::new(rep.q)?;
    let mut total = 0.0;
    for atom in &rep.atoms {
        let dot: f64 = atom.direction.iter().zip(x).map(|(d, t)| d * t).sum();
        total += atom.mass * dot.abs().powf(rep.q);
    }
    for p in &rep.pairs {
        let m = match rep.pair_kernel {
            PairKernel::HalfSum => max2_q1(x[p.i], x[p.j]),
            PairKernel::Density { .. } => max2_via_levy(q, x[p.i], x[p.j])?,
        };
        total += p.coefficient * m;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::lorentz_qnorm_pow;

    fn q(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn density_is_positive_and_even() {
        for p in [0.3, 0.5, 0.9, 1.5, 3.0] {
            for i in 1..400 {
                let xi = i as f64 * 0.0137 + 1e-3;
                if (xi - 1.0).abs() < 1e-9 {
                    continue;
                }
                let g = levy_density_2max(q(p), xi).unwrap();
                assert!(g > 0.0, "q={p} xi={xi}");
                let gm = levy_density_2max(q(p), -xi).unwrap();
                assert!((g - gm).abs() <= 1e-14 * g, "q={p} xi={xi}");
            }
        }
    }

    #[test]
    fn density_matches_naive_formula() {
        for xi in [0.05, 0.4, 0.95, 1.3, 7.0, -2.5] {
            let p = 0.6f64;
            let naive = (((xi - 1.0) as f64).abs().powf(-p) - ((xi + 1.0) as f64).abs().powf(-p)) / xi;
            let v = levy_density_2max(q(p), xi).unwrap();
            assert!((v - naive).abs() <= 1e-12 * naive.abs(), "{xi}: {v} vs {naive}");
        }
    }

    #[test]
    fn density_rejects_singular_points() {
        for xi in [0.0, 1.0, -1.0] {
            assert!(levy_density_2max(q(0.5), xi).is_err());
        }
    }

    #[test]
    fn max2_examples() {
        assert!((max2_via_levy(q(0.5), 1.0, 0.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((max2_via_levy(q(0.5), 2.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!((max2_via_levy(q(0.9), 1.0, 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(max2_via_levy(q(0.5), 0.0, 0.0).unwrap(), 0.0);
        assert!(max2_via_levy(q(1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn q1_split() {
        assert_eq!(max2_q1(3.0, 1.0), 3.0);
        assert_eq!(max2_q1(0.0, 0.0), 0.0);
        assert_eq!(max2_q1(-2.0, 5.5), 5.5);
    }

    #[test]
    fn representation_examples() {
        let rep = build_representation(&Weights::new(vec![1.0; 3]).unwrap(), q(0.5), 1e-9).unwrap();
        assert_eq!(rep.atoms.len(), 3);
        assert!(rep.atoms.iter().all(|a| a.mass == 1.0));
        assert!(rep.pairs.is_empty());

        let w = Weights::from_integers(&[3, 2, 1]).unwrap();
        let rep = build_representation(&w, q(1.0), 1e-9).unwrap();
        assert_eq!(rep.atoms.len(), 3);
        assert_eq!(rep.pairs.len(), 3);
        assert!(rep.pairs.iter().all(|p| p.coefficient == 1.0));
        assert_eq!(rep.pair_kernel, PairKernel::HalfSum);
        assert_eq!(eval_representation(&rep, &[1.0, -1.0, 2.0]).unwrap(), 9.0);
        assert_eq!(eval_representation(&rep, &[0.0; 3]).unwrap(), 0.0);

        let rep = build_representation(&w, q(0.5), 1e-9).unwrap();
        let v = eval_representation(&rep, &[1.0, 0.0, 0.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-3 * 3.0);
        let x = [0.4, -1.7, 2.2];
        let exact = lorentz_qnorm_pow(&w, q(0.5), &x).unwrap();
        assert!((eval_representation(&rep, &x).unwrap() - exact).abs() < 1e-8 * exact);

        assert!(matches!(
            build_representation(&Weights::from_integers(&[4, 2, 1]).unwrap(), q(0.5), 1e-9),
            Err(Error::NotArithmeticProgression { .. })
        ));
        assert!(build_representation(&w, q(1.5), 1e-9).is_err());
    }

    #[test]
    fn divergence_probe_behaviour() {
        let p = mass_near_singularity(q(1.5), 4.0, 12).unwrap();
        let ratios = p.increment_ratios();
        for r in &ratios[2..] {
            assert!((r - 2.0).abs() < 0.05, "{ratios:?}");
        }
        let c = mass_near_singularity(q(0.5), 4.0, 12).unwrap();
        assert!(c.increments.last().unwrap() < &1e-3);
        assert!(mass_near_singularity(q(0.5), 1.0, 3).is_err());
    }
}

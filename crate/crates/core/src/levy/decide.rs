use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::{rational_to_f64, Exponent, Weights, EVEN_INTEGER_TOL};

pub const DEFAULT_DECISION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `q <= 1`: embeddable iff the weights form an arithmetic progression.
    #[serde(rename = "q<=1-AP")]
    ArithmeticProgression,
    /// `q > 1`: embeddable iff the weights are constant.
    #[serde(rename = "q>1-constant")]
    Constant,
}

impl Regime {
    pub fn for_exponent(q: Exponent) -> Self {
        if q.subadditive_regime() {
            Regime::ArithmeticProgression
        } else {
            Regime::Constant
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Fourier,
    Smoothness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingDecision {
    pub verdict: bool,
    pub regime: Regime,
    /// Absolute AP or constancy defect.
    pub defect: f64,
    /// `defect / a_1`, the quantity compared against `tol`.
    pub relative_defect: f64,
    pub tol: f64,
    /// Whether the defect was computed in exact rational arithmetic.
    pub exact: bool,
    pub criterion_used: Criterion,
    pub note: Option<String>,
}

/// `max_k |(a_k - a_{k+1}) - (a_1 - a_2)|`; zero for `n <= 2`.
pub fn ap_defect(a: &[f64]) -> f64 {
    if a.len() < 3 {
        return 0.0;
    }
    let d0 = a[0] - a[1];
    a.windows(2)
        .map(|p| ((p[0] - p[1]) - d0).abs())
        .fold(0.0, f64::max)
}

/// `max_k |a_k - a_1|`.
pub fn constancy_defect(a: &[f64]) -> f64 {
    a.iter().map(|v| (v - a[0]).abs()).fold(0.0, f64::max)
}

fn ap_defect_exact(a: &[BigRational]) -> BigRational {
    if a.len() < 3 {
        return BigRational::zero();
    }
    let d0 = &a[0] - &a[1];
    a.windows(2)
        .map(|p| (&p[0] - &p[1] - &d0).abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}

fn constancy_defect_exact(a: &[BigRational]) -> BigRational {
    a.iter()
        .map(|v| (v - &a[0]).abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// Decides whether `l_{w,q}^n` embeds isometrically into `L_q`.
///
/// Exact weights are decided exactly (`tol` is ignored for the verdict);
/// float weights compare the defect against `tol * a_1`.
pub fn decide_embeddable(w: &Weights, q: Exponent, tol: f64) -> Result<EmbeddingDecision> {
    w.require_ordered()?;
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be non-negative, got {tol}")));
    }
    let regime = Regime::for_exponent(q);
    let a1 = w.values()[0];
    let (defect, verdict, exact) = match w.exact() {
        Some(e) => {
            let d = match regime {
                Regime::ArithmeticProgression => ap_defect_exact(e),
                Regime::Constant => constancy_defect_exact(e),
            };
            (rational_to_f64(&d), d.is_zero(), true)
        }
        None => {
            let d = match regime {
                Regime::ArithmeticProgression => ap_defect(w.values()),
                Regime::Constant => constancy_defect(w.values()),
            };
            (d, d <= tol * a1, false)
        }
    };
    let (criterion_used, note) = if q.is_even_integer(EVEN_INTEGER_TOL) {
        (
            Criterion::Smoothness,
            Some(format!(
                "q = {} is an even integer: the Fourier transform of ||x||^q is a polynomial \
                 distribution and carries no sign information, so the verdict rests on \
                 smoothness of the unit sphere (same rule: constant weights only)",
                q.value()
            )),
        )
    } else {
        (Criterion::Fourier, None)
    };
    Ok(EmbeddingDecision {
        verdict,
        regime,
        defect,
        relative_defect: defect / a1,
        tol,
        exact,
        criterion_used,
        note,
    })
}

fn smoothness_parts(w: &Weights, q: Exponent) -> Result<(f64, f64, f64, f64)> {
    w.require_ordered()?;
    if q.value() <= 1.0 {
        return Err(Error::InvalidExponent(format!(
            "smoothness test needs q > 1, got {}",
            q.value()
        )));
    }
    let a = w.values();
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidWeights("smoothness test needs n >= 2".into()));
    }
    if a[0] <= 0.0 || a[n - 1] <= 0.0 {
        return Err(Error::InvalidWeights("a_1 and a_n must be positive".into()));
    }
    let head: f64 = a[..n - 1].iter().sum();
    let tail: f64 = a[1..].iter().sum();
    Ok((head, a[n - 1], tail, a[0]))
}

/// `|a/b - c/d|` with `a = a_1 + ... + a_{n-1}`, `b = a_n`, `c = a_2 + ... + a_n`, `d = a_1`.
///
/// On the plane section `x_1 = x, x_2 = ... = x_n = y` the unit sphere is
/// `a x^q + b y^q = 1` for `x >= y` and `c x^q + d y^q = 1` for `x <= y`;
/// the defect is the jump in slope where the two branches meet.
pub fn smoothness_defect(w: &Weights, q: Exponent) -> Result<f64> {
    if let Some(e) = w.exact() {
        smoothness_parts(w, q)?;
        let n = e.len();
        let a: BigRational = e[..n - 1].iter().sum();
        let c: BigRational = e[1..].iter().sum();
        let d = (a / &e[n - 1] - c / &e[0]).abs();
        return Ok(rational_to_f64(&d));
    }
    let (a, b, c, d) = smoothness_parts(w, q)?;
    Ok((a / b - c / d).abs())
}

/// One-sided slopes `(left, right)` of the two sphere branches at their
/// crossing `x = y = (a + b)^(-1/q)`, by second-order one-sided differences.
pub fn smoothness_slopes(w: &Weights, q: Exponent, h: f64) -> Result<(f64, f64)> {
    let (a, b, c, d) = smoothness_parts(w, q)?;
    let qv = q.value();
    let x0 = (a + b).powf(-1.0 / qv);
    let right_branch = |x: f64| ((1.0 - a * x.powf(qv)) / b).powf(1.0 / qv);
    let left_branch = |x: f64| ((1.0 - c * x.powf(qv)) / d).powf(1.0 / qv);
    let h = h * x0;
    let y0 = x0;
    let right = (-3.0 * y0 + 4.0 * right_branch(x0 + h) - right_branch(x0 + 2.0 * h)) / (2.0 * h);
    let left = (3.0 * y0 - 4.0 * left_branch(x0 - h) + left_branch(x0 - 2.0 * h)) / (2.0 * h);
    Ok((left, right))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceDecision {
    pub verdict: bool,
    pub probe: usize,
    pub constancy_defect: f64,
    pub tol: f64,
}

/// Decides `l_{w,q}` for an infinite non-increasing positive sequence by its
/// first `probe` terms: a decreasing arithmetic progression of positive
/// numbers is either constant or finite, so only constant sequences embed.
pub fn decide_sequence_space(
    generator: &dyn Fn(usize) -> f64,
    q: Exponent,
    probe: usize,
    tol: f64,
) -> Result<SequenceDecision> {
    let _ = q;
    if probe < 3 {
        return Err(Error::InvalidInput(format!("probe must be at least 3, got {probe}")));
    }
    let a: Vec<f64> = (1..=probe).map(generator).collect();
    if let Some(v) = a.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::InvalidWeights(format!("sequence term {v} is not positive")));
    }
    if a.windows(2).any(|p| p[1] > p[0]) {
        return Err(Error::Unordered);
    }
    let d = constancy_defect(&a);
    Ok(SequenceDecision {
        verdict: d <= tol * a[0],
        probe,
        constancy_defect: d,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    fn ints(v: &[i64]) -> Weights {
        Weights::from_integers(v).unwrap()
    }

    #[test]
    fn decision_examples() {
        assert!(decide_embeddable(&ints(&[3, 2, 1]), q(0.5), 1e-9).unwrap().verdict);
        let d = decide_embeddable(&ints(&[4, 2, 1]), q(1.0), 1e-9).unwrap();
        assert!(!d.verdict);
        assert_eq!(d.defect, 1.0);
        assert!(decide_embeddable(&ints(&[2, 1]), q(0.7), 1e-9).unwrap().verdict);
        assert!(decide_embeddable(&ints(&[2, 2]), q(1.7), 1e-9).unwrap().verdict);
        assert!(!decide_embeddable(&ints(&[2, 1]), q(1.7), 1e-9).unwrap().verdict);
        assert!(matches!(
            decide_embeddable(&ints(&[1, 2]), q(0.5), 1e-9),
            Err(Error::Unordered)
        ));
    }

    #[test]
    fn float_tolerance_is_relative() {
        let w = Weights::new(vec![3e6, 2e6 + 1e-4, 1e6]).unwrap();
        assert!(decide_embeddable(&w, q(1.0), 1e-9).unwrap().verdict);
        let w = Weights::new(vec![3e-6, 2e-6 + 1e-10, 1e-6]).unwrap();
        assert!(!decide_embeddable(&w, q(1.0), 1e-9).unwrap().verdict);
    }

    #[test]
    fn even_integers_use_smoothness() {
        let d = decide_embeddable(&ints(&[1, 1, 1]), q(2.0), 1e-9).unwrap();
        assert_eq!(d.criterion_used, Criterion::Smoothness);
        assert!(d.note.is_some());
        assert!(d.verdict);
        let d = decide_embeddable(&ints(&[2, 1]), q(4.0), 1e-9).unwrap();
        assert_eq!(d.criterion_used, Criterion::Smoothness);
        assert!(!d.verdict);
        let d = decide_embeddable(&ints(&[2, 1]), q(3.0), 1e-9).unwrap();
        assert_eq!(d.criterion_used, Criterion::Fourier);
    }

    #[test]
    fn smoothness_examples() {
        assert_eq!(smoothness_defect(&ints(&[1, 1, 1]), q(1.5)).unwrap(), 0.0);
        assert_eq!(smoothness_defect(&ints(&[2, 1]), q(2.0)).unwrap(), 1.5);
        assert!(smoothness_defect(&Weights::new(vec![1.0, 0.0]).unwrap(), q(2.0)).is_err());
        assert!(smoothness_defect(&ints(&[2, 1]), q(1.0)).is_err());
    }

    #[test]
    fn slopes_match_defect() {
        let w = ints(&[3, 2, 1]);
        let (l, r) = smoothness_slopes(&w, q(1.5), 1e-5).unwrap();
        let defect = smoothness_defect(&w, q(1.5)).unwrap();
        assert!(((l - r).abs() - defect).abs() < 1e-4, "{l} {r} {defect}");
        let (l, r) = smoothness_slopes(&ints(&[2, 2, 2]), q(4.0), 1e-5).unwrap();
        assert!((l - r).abs() < 1e-6);
    }

    #[test]
    fn sequence_examples() {
        assert!(decide_sequence_space(&|_| 1.0, q(1.5), 10, 1e-9).unwrap().verdict);
        assert!(!decide_sequence_space(&|k| 1.0 / k as f64, q(0.5), 10, 1e-9).unwrap().verdict);
        assert!(!decide_sequence_space(&|k| 1.0 + 1.0 / k as f64, q(0.5), 3, 1e-9).unwrap().verdict);
        assert!(matches!(
            decide_sequence_space(&|k| k as f64, q(0.5), 5, 1e-9),
            Err(Error::Unordered)
        ));
        assert!(decide_sequence_space(&|_| 1.0, q(0.5), 2, 1e-9).is_err());
    }

    fn ordered_ints() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(1i64..20, 2..7).prop_map(|mut v| {
            v.sort_unstable_by(|a, b| b.cmp(a));
            v
        })
    }

    proptest! {
        #[test]
        fn hyperplane_heredity(v in ordered_ints(), qi in 0usize..6) {
            let qv = [0.3, 0.5, 1.0, 1.5, 2.0, 3.5][qi];
            let w = ints(&v);
            if decide_embeddable(&w, q(qv), 1e-9).unwrap().verdict {
                let sub = w.prefix(v.len() - 1).unwrap();
                prop_assert!(decide_embeddable(&sub, q(qv), 1e-9).unwrap().verdict);
            }
        }

        #[test]
        fn smoothness_zero_iff_constant(v in ordered_ints(), qi in 0usize..3) {
            let qv = [1.5, 2.0, 4.0][qi];
            let w = ints(&v);
            let d = smoothness_defect(&w, q(qv)).unwrap();
            prop_assert_eq!(d == 0.0, v.iter().all(|x| *x == v[0]));
        }
    }
}

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::decide::{ap_defect, constancy_defect, Regime};
use crate::error::{Error, Result};
use crate::lorentz::{rational_to_f64, Exponent, Weights};
use crate::quadrature::Integrator;

pub const MIN_LEVEL: usize = 2;
pub const MAX_LEVEL: usize = 64;
const SAMPLES: usize = 257;
const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interval {
    /// `(0, 1)`, with `int_0^1 w = 1`.
    #[default]
    Unit,
    /// `(0, inf)`.
    HalfLine,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    /// `w_alpha(t) = 1 + alpha/2 - alpha t`, `0 <= alpha <= 2`.
    Linear { alpha: f64 },
    Constant { value: f64 },
    /// `s t^(s-1)`, `0 < s <= 1`.
    Power { s: f64 },
    /// `sum_i coeffs[i] t^i`.
    Polynomial { coeffs: Vec<f64> },
    #[serde(skip)]
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::Linear { alpha } => write!(f, "Linear {{ alpha: {alpha} }}"),
            WeightKind::Constant { value } => write!(f, "Constant {{ value: {value} }}"),
            WeightKind::Power { s } => write!(f, "Power {{ s: {s} }}"),
            WeightKind::Polynomial { coeffs } => write!(f, "Polynomial {{ coeffs: {coeffs:?} }}"),
            WeightKind::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// A weight function on `(0, 1)` or `(0, inf)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionWeight {
    #[serde(flatten)]
    pub kind: WeightKind,
    #[serde(default)]
    pub interval: Interval,
}

impl FunctionWeight {
    pub fn linear(alpha: f64) -> Self {
        Self::unit(WeightKind::Linear { alpha })
    }

    pub fn constant(value: f64, interval: Interval) -> Self {
        Self {
            kind: WeightKind::Constant { value },
            interval,
        }
    }

    pub fn power(s: f64) -> Self {
        Self::unit(WeightKind::Power { s })
    }

    pub fn polynomial(coeffs: Vec<f64>, interval: Interval) -> Self {
        Self {
            kind: WeightKind::Polynomial { coeffs },
            interval,
        }
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, interval: Interval) -> Self {
        Self {
            kind: WeightKind::Custom(Arc::new(f)),
            interval,
        }
    }

    fn unit(kind: WeightKind) -> Self {
        Self {
            kind,
            interval: Interval::Unit,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            WeightKind::Linear { alpha } => 1.0 + alpha / 2.0 - alpha * t,
            WeightKind::Constant { value } => *value,
            WeightKind::Power { s } => s * t.powf(s - 1.0),
            WeightKind::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            WeightKind::Custom(f) => f(t),
        }
    }

    // Exact rational polynomial coefficients, when the weight is polynomial.
    fn exact_polynomial(&self) -> Option<Vec<BigRational>> {
        let lift = |v: f64| BigRational::from_float(v);
        match &self.kind {
            WeightKind::Linear { alpha } => {
                let a = lift(*alpha)?;
                let two = BigRational::from_integer(BigInt::from(2));
                Some(vec![BigRational::one() + &a / two, -a])
            }
            WeightKind::Constant { value } => Some(vec![lift(*value)?]),
            WeightKind::Polynomial { coeffs } => coeffs.iter().map(|&c| lift(c)).collect(),
            _ => None,
        }
    }

    /// `int_lo^hi w`, closed form where available.
    fn cell_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        match &self.kind {
            WeightKind::Power { s } => Ok(hi.powf(*s) - lo.powf(*s)),
            WeightKind::Custom(f) => Ok(Integrator::new(1e-14, 1e-11).integrate(|t| f(t), lo, hi)?.value),
            _ => {
                let c = self.exact_polynomial().ok_or_else(|| Error::NonFinite("weight coefficient".into()))?;
                let lo = BigRational::from_float(lo).ok_or_else(|| Error::NonFinite("cell bound".into()))?;
                let hi = BigRational::from_float(hi).ok_or_else(|| Error::NonFinite("cell bound".into()))?;
                Ok(rational_to_f64(&polynomial_integral(&c, &lo, &hi)))
            }
        }
    }

    /// Checks positivity and monotonicity on a sample grid, and the
    /// normalization on `(0, 1)`.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            WeightKind::Linear { alpha } if !(0.0..=2.0).contains(alpha) => {
                return Err(Error::InvalidWeights(format!("alpha must lie in [0, 2], got {alpha}")));
            }
            WeightKind::Power { s } if !(*s > 0.0 && *s <= 1.0) => {
                return Err(Error::InvalidWeights(format!("power exponent must lie in (0, 1], got {s}")));
            }
            _ => {}
        }
        let right = match self.interval {
            Interval::Unit => 1.0,
            Interval::HalfLine => MAX_LEVEL as f64,
        };
        let mut prev = f64::INFINITY;
        for i in 1..SAMPLES {
            let t = right * i as f64 / SAMPLES as f64;
            let v = self.eval(t);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidWeights(format!("weight is not positive at t = {t}: {v}")));
            }
            if v > prev * (1.0 + 1e-12) {
                return Err(Error::InvalidWeights(format!("weight increases near t = {t}")));
            }
            prev = v;
        }
        if self.interval == Interval::Unit {
            let total = self.cell_integral(0.0, 1.0)?;
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidWeights(format!(
                    "weight on (0, 1) must integrate to 1, got {total}"
                )));
            }
        }
        Ok(())
    }
}

// int_lo^hi sum c_i t^i
fn polynomial_integral(c: &[BigRational], lo: &BigRational, hi: &BigRational) -> BigRational {
    let mut total = BigRational::zero();
    let (mut ph, mut pl) = (hi.clone(), lo.clone());
    for (i, ci) in c.iter().enumerate() {
        let k = BigRational::from_integer(BigInt::from(i + 1));
        total += ci * (&ph - &pl) / k;
        ph *= hi;
        pl *= lo;
    }
    total
}

fn cells(interval: Interval, n: usize) -> usize {
    match interval {
        Interval::Unit => n,
        Interval::HalfLine => n * n,
    }
}

/// Weights `a_k = int_{(k-1)/n}^{k/n} w`.
///
/// On `(0, 1)` there are `n` cells; on `(0, inf)` the cells of width `1/n`
/// cover `(0, n)`. Polynomial weights are integrated in exact rational
/// arithmetic.
pub fn discretize_function_weight(w: &FunctionWeight, n: usize) -> Result<Weights> {
    if n == 0 {
        return Err(Error::InvalidInput("discretization level must be at least 1".into()));
    }
    w.validate()?;
    let m = cells(w.interval, n);
    if let Some(c) = w.exact_polynomial() {
        let den = BigRational::from_integer(BigInt::from(n));
        let a: Vec<BigRational> = (1..=m)
            .map(|k| {
                let lo = BigRational::from_integer(BigInt::from(k - 1)) / &den;
                let hi = BigRational::from_integer(BigInt::from(k)) / &den;
                polynomial_integral(&c, &lo, &hi)
            })
            .collect();
        return Weights::from_rationals(a);
    }
    let h = 1.0 / n as f64;
    let a = (1..=m)
        .map(|k| w.cell_integral((k - 1) as f64 * h, k as f64 * h))
        .collect::<Result<Vec<f64>>>()?;
    let weights = Weights::new(a)?;
    if !weights.is_ordered() {
        return Err(Error::InvalidWeights("discretized weights are not non-increasing".into()));
    }
    Ok(weights)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDefect {
    pub n: usize,
    pub ap_defect: f64,
    pub constancy_defect: f64,
    /// The defect the verdict used, divided by `a_1`.
    pub relative_defect: f64,
    pub exact: bool,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSpaceDecision {
    pub verdict: bool,
    pub regime: Regime,
    pub interval: Interval,
    pub tol: f64,
    pub levels: Vec<LevelDefect>,
}

/// Decides `L_{w,q}` on `(0, 1)` or `(0, inf)` through its discretizations.
///
/// On `(0, 1)` with `q <= 1` every level must be an arithmetic progression
/// (so `w` is linear decreasing); otherwise every level must be constant.
pub fn decide_function_space(
    w: &FunctionWeight,
    q: Exponent,
    levels: &[usize],
    tol: f64,
) -> Result<FunctionSpaceDecision> {
    if levels.is_empty() {
        return Err(Error::InvalidInput("need at least one level".into()));
    }
    if let Some(n) = levels.iter().find(|n| !(MIN_LEVEL..=MAX_LEVEL).contains(*n)) {
        return Err(Error::InvalidInput(format!(
            "level {n} outside {MIN_LEVEL}..={MAX_LEVEL}"
        )));
    }
    let regime = match w.interval {
        Interval::Unit => Regime::for_exponent(q),
        Interval::HalfLine => Regime::Constant,
    };
    let mut out = Vec::with_capacity(levels.len());
    for &n in levels {
        let weights = discretize_function_weight(w, n)?;
        let a = weights.values();
        let (ap, cons) = (ap_defect(a), constancy_defect(a));
        let used = match regime {
            Regime::ArithmeticProgression => ap,
            Regime::Constant => cons,
        };
        let (exact, passes) = match weights.exact() {
            Some(e) => {
                let zero = match regime {
                    Regime::ArithmeticProgression => {
                        let d0 = &e[0] - &e[1];
                        e.windows(2).all(|p| &p[0] - &p[1] == d0)
                    }
                    Regime::Constant => e.iter().all(|v| v == &e[0]),
                };
                (true, zero)
            }
            None => (false, used <= tol * a[0]),
        };
        out.push(LevelDefect {
            n,
            ap_defect: ap,
            constancy_defect: cons,
            relative_defect: used / a[0],
            exact,
            passes,
        });
    }
    Ok(FunctionSpaceDecision {
        verdict: out.iter().all(|l| l.passes),
        regime,
        interval: w.interval,
        tol,
        levels: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    const LEVELS: [usize; 4] = [2, 3, 5, 7];

    #[test]
    fn linear_weights_discretize_to_exact_progressions() {
        for alpha in [0.0, 0.5, 1.0, 2.0, 0.3] {
            for n in [1, 2, 3, 7, 16] {
                let w = discretize_function_weight(&FunctionWeight::linear(alpha), n).unwrap();
                let e = w.exact().unwrap();
                let total: BigRational = e.iter().sum();
                assert!(total.is_one(), "alpha={alpha} n={n}");
                if n >= 2 {
                    let d0 = &e[0] - &e[1];
                    assert!(e.windows(2).all(|p| &p[0] - &p[1] == d0));
                }
            }
        }
    }

    #[test]
    fn constant_and_power_examples() {
        let w = discretize_function_weight(&FunctionWeight::constant(1.0, Interval::Unit), 4).unwrap();
        assert_eq!(w.values(), &[0.25; 4]);
        let p = discretize_function_weight(&FunctionWeight::power(0.5), 3).unwrap();
        assert!(ap_defect(p.values()) > 1e-3);
        let total: f64 = p.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validation() {
        assert!(FunctionWeight::linear(2.5).validate().is_err());
        assert!(FunctionWeight::constant(2.0, Interval::Unit).validate().is_err());
        assert!(FunctionWeight::constant(2.0, Interval::HalfLine).validate().is_ok());
        assert!(FunctionWeight::custom(|t| t, Interval::Unit).validate().is_err());
        assert!(FunctionWeight::polynomial(vec![2.0, -2.0], Interval::Unit).validate().is_ok());
        assert!(FunctionWeight::linear(1.0).validate().is_ok());
        let lin = FunctionWeight {
            kind: WeightKind::Linear { alpha: 1.0 },
            interval: Interval::HalfLine,
        };
        assert!(lin.validate().is_err());
    }

    #[test]
    fn linear_table() {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let w = FunctionWeight::linear(alpha);
            for qv in [0.5, 1.0] {
                assert!(decide_function_space(&w, q(qv), &LEVELS, 1e-9).unwrap().verdict);
            }
            let d = decide_function_space(&w, q(1.5), &LEVELS, 1e-9).unwrap();
            assert_eq!(d.verdict, alpha == 0.0, "alpha={alpha}");
        }
    }

    #[test]
    fn function_space_examples() {
        let w2 = FunctionWeight::polynomial(vec![2.0, -2.0], Interval::Unit);
        assert!(decide_function_space(&w2, q(1.0), &LEVELS, 1e-9).unwrap().verdict);
        let d = decide_function_space(&FunctionWeight::power(0.5), q(1.0), &[3], 1e-9).unwrap();
        assert!(!d.verdict);
        assert!(d.levels[0].ap_defect > 0.0);
        let c = FunctionWeight::constant(1.0, Interval::HalfLine);
        for qv in [0.5, 1.0, 2.5] {
            assert!(decide_function_space(&c, q(qv), &[2, 3], 1e-9).unwrap().verdict);
        }
        let decay = FunctionWeight::custom(|t| (-t).exp(), Interval::HalfLine);
        assert!(!decide_function_space(&decay, q(0.5), &[2, 3], 1e-9).unwrap().verdict);
        let custom_linear = FunctionWeight::custom(|t| 1.5 - t, Interval::Unit);
        assert!(decide_function_space(&custom_linear, q(0.5), &LEVELS, 1e-9).unwrap().verdict);
        assert!(decide_function_space(&c, q(0.5), &[1], 1e-9).is_err());
        assert!(decide_function_space(&c, q(0.5), &[65], 1e-9).is_err());
    }

    #[test]
    fn json_round_trip() {
        let w: FunctionWeight = serde_json::from_str(r#"{"kind":"linear","alpha":1.0}"#).unwrap();
        assert!(matches!(w.kind, WeightKind::Linear { alpha } if alpha == 1.0));
        assert_eq!(w.interval, Interval::Unit);
        let w: FunctionWeight =
            serde_json::from_str(r#"{"kind":"constant","value":1,"interval":"half_line"}"#).unwrap();
        assert_eq!(w.interval, Interval::HalfLine);
        let s = serde_json::to_string(&FunctionWeight::power(0.5)).unwrap();
        let back: FunctionWeight = serde_json::from_str(&s).unwrap();
        assert!(matches!(back.kind, WeightKind::Power { s } if s == 0.5));
    }
}

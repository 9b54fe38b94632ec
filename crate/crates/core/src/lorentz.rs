//! Weights, exponents, order statistics and the Lorentz q-norm.
//!
//! For weights `a_1 >= ... >= a_n >= 0` (not all zero) and `q > 0` the
//! Lorentz functional is
//!
//! ```text
//! ||x|| = (a_1 (x_1^*)^q + ... + a_n (x_n^*)^q)^(1/q)
//! ```
//!
//! where `x^*` is the non-increasing rearrangement of `|x_1|, ..., |x_n|`.
//! Every other module consumes [`Weights`] and [`Exponent`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Distance from an even integer below which `q` is routed to the
/// smoothness criterion instead of the Fourier one.
pub const EVEN_INTEGER_TOL: f64 = 1e-9;

/// A finite weight sequence `a_1..a_n`, optionally carried in exact rational
/// form alongside the floating point values.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    values: Vec<f64>,
    exact: Option<Vec<BigRational>>,
    ordered: bool,
}

impl Weights {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        let ordered = is_non_increasing(&values);
        Ok(Self {
            values,
            exact: None,
            ordered,
        })
    }

    /// Exact weights; the float view is derived from the rationals.
    pub fn from_rationals(exact: Vec<BigRational>) -> Result<Self> {
        let values: Vec<f64> = exact.iter().map(rational_to_f64).collect();
        if exact.iter().any(|a| a.is_negative()) {
            return Err(Error::InvalidWeights("negative weight".into()));
        }
        validate(&values)?;
        if exact.iter().all(|a| a.is_zero()) {
            return Err(Error::InvalidWeights("all weights are zero".into()));
        }
        let ordered = exact.windows(2).all(|p| p[0] >= p[1]);
        Ok(Self {
            values,
            exact: Some(exact),
            ordered,
        })
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Self::from_rationals(
            values
                .iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[BigRational]> {
        self.exact.as_deref()
    }

    /// Exact rationals: the stored ones, or the exact binary value of each float.
    pub fn to_rationals(&self) -> Vec<BigRational> {
        match &self.exact {
            Some(e) => e.clone(),
            None => self
                .values
                .iter()
                .map(|&v| BigRational::from_float(v).expect("finite by invariant"))
                .collect(),
        }
    }

    /// True when `a_1 >= a_2 >= ... >= a_n`.
    pub fn is_ordered(&self) -> bool {
        self.ordered
    }

    pub fn require_ordered(&self) -> Result<()> {
        if self.ordered {
            Ok(())
        } else {
            Err(Error::Unordered)
        }
    }

    /// The same multiset sorted non-increasingly.
    pub fn sorted(&self) -> Weights {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&i, &j| self.values[j].total_cmp(&self.values[i]));
        Weights {
            values: idx.iter().map(|&i| self.values[i]).collect(),
            exact: self
                .exact
                .as_ref()
                .map(|e| idx.iter().map(|&i| e[i].clone()).collect()),
            ordered: true,
        }
    }

    /// The first `k` weights (the Lorentz space restricted to a coordinate hyperplane section).
    pub fn prefix(&self, k: usize) -> Result<Weights> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidInput(format!(
                "prefix length {k} out of range 1..={}",
                self.len()
            )));
        }
        match &self.exact {
            Some(e) => Weights::from_rationals(e[..k].to_vec()),
            None => Weights::new(self.values[..k].to_vec()),
        }
    }

    /// `lambda * a` for `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Weights> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        Weights::new(self.values.iter().map(|v| v * lambda).collect())
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidWeights("need at least one weight".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidWeights(format!("non-finite weight {v}")));
    }
    if let Some(v) = values.iter().find(|&&v| v < 0.0) {
        return Err(Error::InvalidWeights(format!("negative weight {v}")));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    Ok(())
}

fn is_non_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|p| p[0] >= p[1])
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The exponent `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize)]
#[serde(transparent)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 {
            return Err(Error::InvalidExponent(format!("q must be a positive finite number, got {q}")));
        }
        Ok(Self(q))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether `q` lies within `tol` of one of 2, 4, 6, ...
    pub fn is_even_integer(self, tol: f64) -> bool {
        let nearest = (self.0 / 2.0).round() * 2.0;
        nearest >= 2.0 && (self.0 - nearest).abs() <= tol
    }

    /// `q <= 1`, where the functional is a q-norm and `||x+y||^q <= ||x||^q + ||y||^q`.
    pub fn subadditive_regime(self) -> bool {
        self.0 <= 1.0
    }
}

/// `(|x|)` sorted non-increasingly. Ties keep their original order.
pub fn order_statistics(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|t| t.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `sum_k a_k (x_k^*)^q` with the weights taken in the given order; no
/// ordering requirement on `a`.
pub fn weighted_order_sum(a: &[f64], q: Exponent, x: &[f64]) -> Result<f64> {
    if a.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: x.len(),
        });
    }
    if x.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("sample vector".into()));
    }
    let q = q.value();
    Ok(a.iter()
        .zip(order_statistics(x))
        .map(|(ak, xs)| ak * xs.powf(q))
        .sum())
}

/// The Lorentz q-norm `(sum_k a_k (x_k^*)^q)^(1/q)`.
pub fn lorentz_qnorm(w: &Weights, q: Exponent, x: &[f64]) -> Result<f64> {
    w.require_ordered()?;
    Ok(weighted_order_sum(w.values(), q, x)?.powf(1.0 / q.value()))
}

/// `||x||^q` for ordered weights, skipping the final root.
pub fn lorentz_qnorm_pow(w: &Weights, q: Exponent, x: &[f64]) -> Result<f64> {
    w.require_ordered()?;
    weighted_order_sum(w.values(), q, x)
}

/// Exact `q = 1` norm `sum_k a_k x_k^*` in rational arithmetic.
pub fn lorentz_norm1_exact(a: &[BigRational], x: &[BigRational]) -> Result<BigRational> {
    if a.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: x.len(),
        });
    }
    let mut abs: Vec<BigRational> = x.iter().map(|t| t.abs()).collect();
    abs.sort_by(|u, v| v.cmp(u));
    Ok(a.iter()
        .zip(abs.iter())
        .fold(BigRational::zero(), |acc, (ak, xs)| acc + ak * xs))
}

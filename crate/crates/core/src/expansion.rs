//! Inclusion-exclusion expansion of weighted order-statistic sums into
//! sums of max-functions over coordinate subsets:
//!
//! ```text
//! sum_k a_k f(x_k^*) = sum_k c_k sum_{|S| = k} f(max_{i in S} |x_i|)
//! c_k = sum_{j=1}^{k} (-1)^(j-1) C(k-1, j-1) a_{n-k+j}
//! ```
//!
//! The identity holds for arbitrary real weights and any `f`. Binomials are
//! exact big integers so coefficient cancellation is exact on rational input.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lorentz::{rational_to_f64, Weights};
use crate::numeric::NeumaierSum;

/// Largest dimension accepted by [`expand`] (the sum runs over `2^n` subsets).
pub const MAX_EXPAND_DIM: usize = 20;

/// The coefficients `c_1..c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub values: Vec<f64>,
    /// Present when the weights were exact.
    pub exact: Option<Vec<BigRational>>,
}

impl ExpansionCoefficients {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `C(n, k)` as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn sign(j: usize) -> BigInt {
    if j.is_multiple_of(2) {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// `sum_{j=1}^k (-1)^(j-1) C(k-1, j-1)`; zero for `k >= 2`.
pub fn alternating_binomial_sum(k: usize) -> BigInt {
    (1..=k)
        .map(|j| sign(j - 1) * binomial((k - 1) as u64, (j - 1) as u64))
        .sum()
}

/// `sum_{j=1}^k (-1)^j (j-1) C(k-1, j-1)`; zero for `k >= 3`.
pub fn weighted_alternating_binomial_sum(k: usize) -> BigInt {
    (1..=k)
        .map(|j| sign(j) * BigInt::from(j - 1) * binomial((k - 1) as u64, (j - 1) as u64))
        .sum()
}

fn coefficients_exact(a: &[BigRational]) -> Vec<BigRational> {
    let n = a.len();
    (1..=n)
        .map(|k| {
            (1..=k).fold(BigRational::zero(), |acc, j| {
                let b = BigRational::from_integer(
                    sign(j - 1) * binomial((k - 1) as u64, (j - 1) as u64),
                );
                acc + b * &a[n - k + j - 1]
            })
        })
        .collect()
}

fn coefficients_f64(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (1..=n)
        .map(|k| {
            let mut acc = NeumaierSum::default();
            for j in 1..=k {
                let b = rational_to_f64(&BigRational::from_integer(binomial(
                    (k - 1) as u64,
                    (j - 1) as u64,
                )));
                let s = if j % 2 == 1 { 1.0 } else { -1.0 };
                acc.add(s * b * a[n - k + j - 1]);
            }
            acc.sum()
        })
        .collect()
}

/// The coefficients for arbitrary real weights given in order.
pub fn coefficients_for(a: &[f64]) -> Vec<f64> {
    coefficients_f64(a)
}

/// Exact coefficients for rational weights given in order.
pub fn coefficients_for_exact(a: &[BigRational]) -> Vec<BigRational> {
    coefficients_exact(a)
}

/// Coefficients of the expansion; exact when the weights are exact.
pub fn expansion_coefficients(w: &Weights) -> ExpansionCoefficients {
    match w.exact() {
        Some(e) => {
            let exact = coefficients_exact(e);
            ExpansionCoefficients {
                values: exact.iter().map(rational_to_f64).collect(),
                exact: Some(exact),
            }
        }
        None => ExpansionCoefficients {
            values: coefficients_f64(w.values()),
            exact: None,
        },
    }
}

/// `c = sum_k (-1)^(k-1) C(n-1, k-1) a_k`, the multiple relating the Fourier
/// transform of the order-statistic sum to that of `f(max |x_i|)` off the
/// coordinate planes. Equal to `c_n`.
pub fn transform_constant(w: &Weights) -> f64 {
    let n = w.len();
    let a = w.to_rationals();
    let c = (1..=n).fold(BigRational::zero(), |acc, k| {
        acc + BigRational::from_integer(sign(k - 1) * binomial((n - 1) as u64, (k - 1) as u64))
            * &a[k - 1]
    });
    debug_assert_eq!(c, coefficients_exact(&a)[n - 1]);
    rational_to_f64(&c)
}

/// Evaluates the right-hand side of the expansion for weights `a` in the
/// given order (no ordering requirement).
///
/// Subset maxima are built incrementally: the maximum over a mask is the
/// maximum over the mask without its lowest element and that element.
pub fn expand_with(a: &[f64], f: &dyn Fn(f64) -> f64, x: &[f64]) -> Result<f64> {
    let n = a.len();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    if n > MAX_EXPAND_DIM {
        return Err(Error::TooLarge {
            what: "subset expansion",
            n,
            max: MAX_EXPAND_DIM,
        });
    }
    let c = coefficients_f64(a);
    let abs: Vec<f64> = x.iter().map(|t| t.abs()).collect();
    let total = 1usize << n;
    let mut subset_max = vec![0.0f64; total];
    let mut by_size: Vec<NeumaierSum> = vec![NeumaierSum::default(); n + 1];
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let m = if rest == 0 {
            abs[low]
        } else {
            subset_max[rest].max(abs[low])
        };
        subset_max[mask] = m;
        by_size[mask.count_ones() as usize].add(f(m));
    }
    let mut acc = NeumaierSum::default();
    for k in 1..=n {
        if c[k - 1] != 0.0 {
            acc.add(c[k - 1] * by_size[k].sum());
        }
    }
    Ok(acc.sum())
}

/// [`expand_with`] on a weight vector.
pub fn expand(w: &Weights, f: &dyn Fn(f64) -> f64, x: &[f64]) -> Result<f64> {
    expand_with(w.values(), f, x)
}

/// Left-hand side `sum_k a_k f(x_k^*)` for weights in the given order.
pub fn order_statistic_sum(a: &[f64], f: &dyn Fn(f64) -> f64, x: &[f64]) -> Result<f64> {
    if x.len() != a.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: x.len(),
        });
    }
    let mut acc = NeumaierSum::default();
    for (ak, xs) in a.iter().zip(crate::lorentz::order_statistics(x)) {
        acc.add(ak * f(xs));
    }
    Ok(acc.sum())
}

/// True when every coefficient past the second vanishes exactly, which is
/// the case precisely for arithmetic-progression weights.
pub fn higher_coefficients_vanish(c: &[BigRational]) -> bool {
    c.iter().skip(2).all(|v| v.is_zero())
}

/// `|c_k|` maximum over `k >= 3` (float diagnostic).
pub fn higher_coefficient_magnitude(c: &ExpansionCoefficients) -> f64 {
    match &c.exact {
        Some(e) => e.iter().skip(2).map(|v| rational_to_f64(&v.abs())).fold(0.0, f64::max),
        None => c.values.iter().skip(2).map(|v| v.abs()).fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ri(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(0, 0), BigInt::from(1));
        assert_eq!(binomial(3, 4), BigInt::from(0));
        assert_eq!(binomial(60, 30), "118264581564861424".parse::<BigInt>().unwrap());
    }

    #[test]
    fn coefficient_examples() {
        let c = expansion_coefficients(&Weights::from_integers(&[1, 0, 0]).unwrap());
        assert_eq!(c.exact.unwrap(), vec![ri(0), ri(0), ri(1)]);
        let c = expansion_coefficients(&Weights::from_integers(&[3, 2, 1]).unwrap());
        assert_eq!(c.exact.unwrap(), vec![ri(1), ri(1), ri(0)]);
    }

    #[test]
    fn alternating_sums_vanish() {
        assert_eq!(alternating_binomial_sum(1), BigInt::from(1));
        for k in 2..40 {
            assert!(alternating_binomial_sum(k).is_zero(), "k={k}");
        }
        for k in 3..40 {
            assert!(weighted_alternating_binomial_sum(k).is_zero(), "k={k}");
        }
        assert_eq!(weighted_alternating_binomial_sum(2), BigInt::from(1));
    }

    #[test]
    fn expand_examples() {
        let w = Weights::new(vec![2.0, 1.0]).unwrap();
        let v = expand(&w, &|t| t, &[1.0, -3.0]).unwrap();
        assert!((v - 7.0).abs() < 1e-14);
        assert_eq!(expand(&w, &|_| 0.0, &[1.0, -3.0]).unwrap(), 0.0);
    }

    #[test]
    fn expand_rejects_large_n() {
        let a = vec![1.0; 21];
        let x = vec![1.0; 21];
        assert!(matches!(expand_with(&a, &|t| t, &x), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn transform_constant_examples() {
        assert_eq!(transform_constant(&Weights::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap()), 1.0);
        assert_eq!(transform_constant(&Weights::from_integers(&[7, 5, 3, 1]).unwrap()), 0.0);
        let w = Weights::new(vec![0.9, 0.4, 0.35, 0.1]).unwrap();
        let c = expansion_coefficients(&w);
        assert!((transform_constant(&w) - c.values[3]).abs() < 1e-15);
    }
}

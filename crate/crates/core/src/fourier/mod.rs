//! Distributional Fourier transform of `f(max(|x_1|, ..., |x_n|))` away from
//! the coordinate planes and diagonal hyperplanes.
//!
//! Convention: `f^(xi) = int f(x) exp(i <x, xi>) dx`, no `2 pi` factor. With
//! it `(|t|^q)^ = c_q |xi|^(-1-q)` where
//! `c_q = 2^(q+1) sqrt(pi) Gamma((q+1)/2) / Gamma(-q/2)`, so `c_1 = -2`.
//!
//! For `xi` in `G` and `u = (f(t) sgn(t)^(n-1))^` continuous off the origin,
//!
//! ```text
//! f(max|x_i|)^(xi) = i^(n-1) / (2 xi_1...xi_n) * sum_delta delta_1...delta_n * s * u(s),
//!     s = delta_1 xi_1 + ... + delta_n xi_n
//! ```
//!
//! summed over all `2^n` sign vectors `delta`.

pub mod pairing;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lorentz::{Exponent, EVEN_INTEGER_TOL};
use crate::special::ln_gamma_signed;

pub use pairing::{ft_pairing_oracle, BumpSpec, PairingOptions, PairingReport};

/// Default tolerance for membership in `G`.
pub const DEFAULT_G_TOL: f64 = 1e-8;

/// Largest dimension for the sign-vector sums.
pub const MAX_FT_DIM: usize = 24;

/// A frequency with its distances to the excluded hyperplanes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyPoint {
    pub coords: Vec<f64>,
    /// `min_k |xi_k|`
    pub margin_axes: f64,
    /// `min_delta |(delta, xi)|`
    pub margin_diag: f64,
}

impl FrequencyPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty frequency".into()));
        }
        if n > MAX_FT_DIM {
            return Err(Error::TooLarge {
                what: "sign-vector enumeration",
                n,
                max: MAX_FT_DIM,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("frequency".into()));
        }
        let margin_axes = coords.iter().map(|c| c.abs()).fold(f64::INFINITY, f64::min);
        // delta and -delta give the same |(delta, xi)|; fix delta_1 = +1.
        let mut margin_diag = f64::INFINITY;
        for mask in 0..(1usize << (n - 1)) {
            let mut s = coords[0];
            for (k, c) in coords.iter().enumerate().skip(1) {
                if mask >> (k - 1) & 1 == 1 {
                    s -= c;
                } else {
                    s += c;
                }
            }
            margin_diag = margin_diag.min(s.abs());
        }
        Ok(Self {
            coords,
            margin_axes,
            margin_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn in_g(&self, tol: f64) -> bool {
        self.margin_axes > tol && self.margin_diag > tol
    }

    fn require_in_g(&self, tol: f64) -> Result<()> {
        if self.in_g(tol) {
            Ok(())
        } else {
            Err(Error::OutsideG {
                margin_axes: self.margin_axes,
                margin_diag: self.margin_diag,
                tol,
            })
        }
    }
}

/// The one-dimensional transform `u = (f(t) sgn(t)^(n-1))^` as a function
/// on the nonzero reals.
#[derive(Clone)]
pub struct OneDimTransform {
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// The dimension `n` whose parity fixed `sgn(t)^(n-1)`.
    pub dim: usize,
    /// `u(y) = O(|y|^-singularity_order)` as `y -> 0`.
    pub singularity_order: f64,
    /// `u(y) = O(|y|^-decay_order)` as `|y| -> infinity`.
    pub decay_order: f64,
}

impl std::fmt::Debug for OneDimTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OneDimTransform")
            .field("dim", &self.dim)
            .field("singularity_order", &self.singularity_order)
            .field("decay_order", &self.decay_order)
            .finish_non_exhaustive()
    }
}

impl OneDimTransform {
    /// A caller-supplied transform for dimension `dim`.
    pub fn custom(
        dim: usize,
        singularity_order: f64,
        decay_order: f64,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            func: Arc::new(func),
            dim,
            singularity_order,
            decay_order,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        (self.func)(y)
    }
}

/// `c_q = 2^(q+1) sqrt(pi) Gamma((q+1)/2) / Gamma(-q/2)`.
pub fn cq(q: Exponent) -> Result<f64> {
    if q.is_even_integer(EVEN_INTEGER_TOL) {
        return Err(Error::EvenIntegerExponent(q.value()));
    }
    let q = q.value();
    let (ln_num, s_num) = ln_gamma_signed((q + 1.0) / 2.0)?;
    let (ln_den, s_den) = ln_gamma_signed(-q / 2.0)?;
    let ln = (q + 1.0) * 2f64.ln() + 0.5 * PI.ln() + ln_num - ln_den;
    Ok(s_num * s_den * ln.exp())
}

/// `u(y) = c_q |y|^(-1-q)`, the transform of `|t|^q` (odd `n` only, where
/// `|t|^q sgn(t)^(n-1) = |t|^q`).
pub fn u_for_power(q: Exponent, n: usize) -> Result<OneDimTransform> {
    if n.is_multiple_of(2) {
        return Err(Error::UnsupportedParity(n));
    }
    let c = cq(q)?;
    let p = q.value();
    Ok(OneDimTransform::custom(n, 1.0 + p, 1.0 + p, move |y: f64| {
        c * y.abs().powf(-1.0 - p)
    }))
}

fn sign_sum(xi: &[f64], u: &OneDimTransform) -> f64 {
    let n = xi.len();
    let mut acc = crate::numeric::NeumaierSum::default();
    for mask in 0..(1usize << n) {
        let mut s = 0.0;
        let mut prod = 1.0;
        for (k, c) in xi.iter().enumerate() {
            if mask >> k & 1 == 1 {
                s -= c;
                prod = -prod;
            } else {
                s += c;
            }
        }
        acc.add(prod * s * u.eval(s));
    }
    acc.sum()
}

/// The transform value as a complex number (imaginary for even `n` with real `u`).
pub fn ft_max_formula_complex(xi: &FrequencyPoint, u: &OneDimTransform, tol: f64) -> Result<Complex64> {
    let n = xi.dim();
    if u.dim != n {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            found: n,
        });
    }
    xi.require_in_g(tol)?;
    let prod: f64 = xi.coords.iter().product();
    let i_pow = Complex64::i().powu((n - 1) as u32);
    Ok(i_pow * (sign_sum(&xi.coords, u) / (2.0 * prod)))
}

/// The real transform value for odd `n`.
pub fn ft_max_formula(xi: &FrequencyPoint, u: &OneDimTransform, tol: f64) -> Result<f64> {
    let n = xi.dim();
    if n.is_multiple_of(2) {
        return Err(Error::ComplexResult(n));
    }
    if u.dim != n {
        return Err(Error::DimensionMismatch {
            expected: u.dim,
            found: n,
        });
    }
    xi.require_in_g(tol)?;
    let prod: f64 = xi.coords.iter().product();
    let phase = if ((n - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(phase * sign_sum(&xi.coords, u) / (2.0 * prod))
}

/// Transform of `max^q(|x_1|, ..., |x_n|)` at `xi` (odd `n`).
pub fn ft_max_power(q: Exponent, xi: &[f64], tol: f64) -> Result<f64> {
    let u = u_for_power(q, xi.len())?;
    ft_max_formula(&FrequencyPoint::new(xi.to_vec())?, &u, tol)
}

/// One sample of a sign scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub xi: [f64; 3],
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignScan {
    pub q: f64,
    pub samples: Vec<ScanSample>,
    pub positive: usize,
    pub negative: usize,
    pub both_signs: bool,
}

/// Samples the `n = 3` transform of `max^q` on a regular grid over an
/// axis-aligned box, keeping only grid points in `G`.
///
/// `grid` is the number of nodes per axis (endpoints included).
pub fn sign_scan(q: Exponent, bounds: [(f64, f64); 3], grid: usize, tol: f64) -> Result<SignScan> {
    if grid < 2 {
        return Err(Error::InvalidInput("grid needs at least 2 nodes per axis".into()));
    }
    for (lo, hi) in bounds {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!("bad box side [{lo}, {hi}]")));
        }
    }
    let u = u_for_power(q, 3)?;
    let node = |axis: usize, i: usize| {
        let (lo, hi) = bounds[axis];
        lo + (hi - lo) * i as f64 / (grid - 1) as f64
    };
    let samples: Vec<ScanSample> = (0..grid * grid * grid)
        .into_par_iter()
        .filter_map(|idx| {
            let xi = [node(0, idx / (grid * grid)), node(1, idx / grid % grid), node(2, idx % grid)];
            let fp = FrequencyPoint::new(xi.to_vec()).ok()?;
            if !fp.in_g(tol) {
                return None;
            }
            ft_max_formula(&fp, &u, tol)
                .ok()
                .map(|value| ScanSample { xi, value })
        })
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidInput("no grid point of the box lies in G".into()));
    }
    let positive = samples.iter().filter(|s| s.value > 0.0).count();
    let negative = samples.iter().filter(|s| s.value < 0.0).count();
    Ok(SignScan {
        q: q.value(),
        samples,
        positive,
        negative,
        both_signs: positive > 0 && negative > 0,
    })
}

/// Writes scan samples as CSV with columns `xi1,xi2,xi3,value`.
pub fn write_scan_csv<W: std::io::Write>(scan: &SignScan, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["xi1", "xi2", "xi3", "value"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for s in &scan.samples {
        wtr.write_record([
            s.xi[0].to_string(),
            s.xi[1].to_string(),
            s.xi[2].to_string(),
            format!("{:e}", s.value),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

//! Fourier transforms of order statistics and isometric embeddings of
//! Lorentz spaces `l_{w,q}^n` into `L_q`.
//!
//! * [`lorentz`]: weights, exponents, order statistics and the Lorentz q-norm.
//! * [`expansion`]: the inclusion-exclusion expansion of order-statistic sums
//!   into max-functions, with exact coefficients.
//! * [`fourier`]: the sign-sum formula for the Fourier transform of
//!   `f(max |x_i|)` and an independent pairing oracle.
//! * [`levy`]: Levy representations and embeddability decisions.
//! * [`zonotope`]: exact dual-ball geometry for `q = 1`.
//! * [`posdef`]: Gram-matrix tests of `exp(-||x||^q)`.

pub mod error;
pub mod expansion;
pub mod fourier;
pub mod io;
pub mod levy;
pub mod lorentz;
pub mod numeric;
pub mod posdef;
pub mod quadrature;
pub mod special;
pub mod zonotope;

pub use error::{Error, Result};
pub use lorentz::{lorentz_qnorm, order_statistics, Exponent, Weights};

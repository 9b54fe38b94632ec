//! Log-gamma via the Lanczos approximation, with the reflection formula for
//! arguments below 1/2 (including negative non-integers).

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `(ln |Gamma(x)|, sign Gamma(x))`. Errors at the poles `0, -1, -2, ...`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::NonFinite(format!("gamma argument {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::SingularInput(format!("Gamma has a pole at {x}")));
    }
    if x < 0.5 {
        // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        let s = (PI * x).sin();
        let (lg, sg) = ln_gamma_signed(1.0 - x)?;
        let sign = if s < 0.0 { -sg } else { sg };
        return Ok((PI.ln() - s.abs().ln() - lg, sign));
    }
    let x = x - 1.0;
    let t = x + LANCZOS_G + 0.5;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    let lg = 0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln();
    Ok((lg, 1.0))
}

pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_signed(x).map(|(v, _)| v)
}

pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma_signed(x).map(|(v, s)| s * v.exp())
}

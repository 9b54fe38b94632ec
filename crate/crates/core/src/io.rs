//! Weight files: a JSON array of numbers (or `"p/q"` strings), or CSV with
//! one value per line. Decimal literals are read as exact rationals.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lorentz::Weights;

/// Parses `"p/q"`, an integer, or a decimal literal with optional exponent
/// into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }

    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let shift = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = (0..shift.unsigned_abs()).fold(BigRational::one(), |acc, _| acc * &ten);
    if shift >= 0 {
        value *= scale;
    } else {
        value /= scale;
    }
    Ok(if neg { -value } else { value })
}

/// Parses a comma-separated inline list such as `3,2,1` or `1/2, 1/3`.
pub fn parse_inline_weights(s: &str) -> Result<Weights> {
    let vals = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_rational)
        .collect::<Result<Vec<_>>>()?;
    Weights::from_rationals(vals)
}

/// Parses weight file contents, detecting JSON by a leading `[`.
pub fn parse_weights_text(content: &str) -> Result<Weights> {
    let trimmed = content.trim_start();
    let vals = if trimmed.starts_with('[') {
        let raw: Vec<serde_json::Value> =
            serde_json::from_str(trimmed).map_err(|e| Error::Parse(e.to_string()))?;
        raw.iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => parse_rational(&n.to_string()),
                serde_json::Value::String(s) => parse_rational(s),
                other => Err(Error::Parse(format!("unexpected JSON value {other}"))),
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(content.as_bytes());
        let mut vals = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            match rec.len() {
                0 => {}
                1 => {
                    if !rec[0].is_empty() {
                        vals.push(parse_rational(&rec[0])?)
                    }
                }
                k => return Err(Error::Parse(format!("expected one value per line, got {k}"))),
            }
        }
        vals
    };
    Weights::from_rationals(vals)
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<Weights> {
    let content = std::fs::read_to_string(path.as_ref())?;
    parse_weights_text(&content)
}

/// JSON array of the float values; re-parses to the same floats.
pub fn weights_to_json(w: &Weights) -> serde_json::Value {
    serde_json::Value::from(w.values().to_vec())
}

/// Reads a point set: JSON array of arrays of numbers.
pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let content = std::fs::read_to_string(path.as_ref())?;
    serde_json::from_str(&content).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rational_literals() {
        assert_eq!(parse_rational("0.1").unwrap(), r(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), r(-5, 2));
        assert_eq!(parse_rational("3").unwrap(), r(3, 1));
        assert_eq!(parse_rational("1/3").unwrap(), r(1, 3));
        assert_eq!(parse_rational("1.5e2").unwrap(), r(150, 1));
        assert_eq!(parse_rational("25e-2").unwrap(), r(1, 4));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn json_and_csv() {
        let w = parse_weights_text("[3, 2, \"1/2\"]").unwrap();
        assert_eq!(w.values(), &[3.0, 2.0, 0.5]);
        assert!(w.exact().is_some());
        let w = parse_weights_text("3\n2\n# comment\n\n1\n").unwrap();
        assert_eq!(w.values(), &[3.0, 2.0, 1.0]);
        assert!(parse_weights_text("[true]").is_err());
        assert!(parse_weights_text("1,2\n").is_err());
    }

    #[test]
    fn json_round_trip() {
        let w = Weights::new(vec![0.1, 1.0 / 3.0, 2e-7]).unwrap();
        let text = weights_to_json(&w).to_string();
        let back = parse_weights_text(&text).unwrap();
        assert_eq!(back.values(), w.values());
    }
}

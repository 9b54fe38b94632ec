use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use lorentz_embed::io::{parse_inline_weights, read_weights};
use lorentz_embed::{Error, Result, Weights};

/// Weights from a file or an inline list.
#[derive(Args, Debug, Clone, Serialize)]
#[group(required = true, multiple = false)]
pub struct WeightsArg {
    /// Weight file: JSON array (numbers or "p/q" strings) or one value per line
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,

    /// Inline weights, e.g. 3,2,1 or 1/2,1/3
    #[arg(long = "w", value_name = "LIST")]
    pub inline: Option<String>,
}

impl WeightsArg {
    pub fn load(&self) -> Result<Weights> {
        match (&self.weights, &self.inline) {
            (Some(p), _) => read_weights(p),
            (None, Some(s)) => parse_inline_weights(s),
            (None, None) => Err(Error::InvalidInput("no weights given".into())),
        }
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}")))
        .collect()
}

pub fn parse_levels(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("bad level {t:?}: {e}")))
        .collect()
}

/// `lo:hi,lo:hi,lo:hi`
pub fn parse_box(s: &str) -> std::result::Result<[(f64, f64); 3], String> {
    let sides: Vec<(f64, f64)> = s
        .split(',')
        .map(|side| {
            let (lo, hi) = side
                .split_once(':')
                .ok_or_else(|| format!("box side {side:?} is not lo:hi"))?;
            let lo = lo.trim().parse::<f64>().map_err(|e| e.to_string())?;
            let hi = hi.trim().parse::<f64>().map_err(|e| e.to_string())?;
            Ok((lo, hi))
        })
        .collect::<std::result::Result<_, String>>()?;
    sides
        .try_into()
        .map_err(|v: Vec<(f64, f64)>| format!("box needs 3 sides, got {}", v.len()))
}

/// Test functions for `expand-check`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnSpec {
    /// `|t|^p`
    Pow { p: f64 },
    Cos,
    /// `exp(-|t|)`
    ExpNeg,
}

impl FnSpec {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            FnSpec::Pow { p } => t.abs().powf(p),
            FnSpec::Cos => t.cos(),
            FnSpec::ExpNeg => (-t.abs()).exp(),
        }
    }
}

pub fn parse_fn(s: &str) -> std::result::Result<FnSpec, String> {
    match s.trim() {
        "cos" => Ok(FnSpec::Cos),
        "exp-neg" => Ok(FnSpec::ExpNeg),
        "square" => Ok(FnSpec::Pow { p: 2.0 }),
        other => {
            let p = other
                .strip_prefix("pow:")
                .ok_or_else(|| format!("unknown function {other:?} (pow:P, square, cos, exp-neg)"))?;
            let p = p.parse::<f64>().map_err(|e| e.to_string())?;
            Ok(FnSpec::Pow { p })
        }
    }
}

/// Accepts strict JSON or the shorthand `{kind:linear,alpha:1}` with bare
/// identifiers, which are quoted before parsing.
pub fn relaxed_json(s: &str) -> std::result::Result<serde_json::Value, String> {
    if let Ok(v) = serde_json::from_str(s) {
        return Ok(v);
    }
    let mut out = String::with_capacity(s.len() + 16);
    let mut chars = s.chars().peekable();
    let mut in_str = false;
    while let Some(c) = chars.next() {
        if in_str {
            out.push(c);
            if c == '\\' {
                if let Some(n) = chars.next() {
                    out.push(n);
                }
            } else if c == '"' {
                in_str = false;
            }
            continue;
        }
        if c == '"' {
            in_str = true;
            out.push(c);
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::from(c);
            while let Some(&n) = chars.peek() {
                if n.is_ascii_alphanumeric() || n == '_' {
                    word.push(n);
                    chars.next();
                } else {
                    break;
                }
            }
            if matches!(word.as_str(), "true" | "false" | "null") {
                out.push_str(&word);
            } else {
                out.push('"');
                out.push_str(&word);
                out.push('"');
            }
        } else {
            out.push(c);
        }
    }
    serde_json::from_str(&out).map_err(|e| format!("invalid weight spec {s:?}: {e}"))
}

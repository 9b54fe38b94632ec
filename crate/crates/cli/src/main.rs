mod args;
mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use args::{parse_box, parse_fn, parse_levels, parse_list, FnSpec, WeightsArg};
use commands::{Outcome, Verdict};

// Aliases keep clap from treating the parsed lists as repeated flags.
type List = Vec<f64>;
type Levels = Vec<usize>;

pub const SCHEMA: &str = "1";

const EXIT_NO: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser, Debug, Serialize)]
#[command(name = "lorentz-embed", version)]
#[command(about = "Order statistics, Fourier transforms and isometric embeddings of Lorentz spaces into L_q")]
pub struct Cli {
    /// RNG seed for sampled checks
    #[arg(long, global = true, env = "LORENTZ_EMBED_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (default: all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Omit the timestamp from the output header
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Relative tolerance for arithmetic-progression and constancy defects
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,

    /// Membership tolerance for G (distance to coordinate and diagonal hyperplanes)
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub g_tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Expansion coefficients c_1..c_n of the order-statistic sum
    Coeffs {
        #[command(flatten)]
        weights: WeightsArg,
    },
    /// Both sides of the order-statistic expansion at one point
    ExpandCheck {
        #[command(flatten)]
        weights: WeightsArg,
        /// Point, e.g. 1,-2,0.5
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        x: List,
        /// Test function: pow:P, square, cos, exp-neg
        #[arg(long, value_parser = parse_fn, default_value = "pow:1")]
        f: FnSpec,
    },
    /// Fourier transform of max^q
    #[command(subcommand)]
    Ft(FtCommand),
    /// Levy representations
    #[command(subcommand)]
    Levy(LevyCommand),
    /// Embeddability decisions
    #[command(subcommand)]
    Decide(DecideCommand),
    /// Dual-ball geometry for q = 1
    #[command(subcommand)]
    Zono(ZonoCommand),
    /// Positive definiteness of exp(-||x||^q)
    #[command(subcommand)]
    Posdef(PosdefCommand),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FtCommand {
    /// Evaluate the transform at one frequency (odd n)
    Eval {
        #[arg(long)]
        q: f64,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        xi: List,
    },
    /// Sign scan over a box in R^3
    Scan {
        #[arg(long)]
        q: f64,
        /// lo:hi,lo:hi,lo:hi
        #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
        bounds: [(f64, f64); 3],
        /// Nodes per axis
        #[arg(long, default_value_t = 16)]
        grid: usize,
        /// CSV file for the samples
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check the transform against max^q through a bump test function
    Pairing {
        #[arg(long)]
        q: f64,
        #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
        center: List,
        /// One radius, or three per-axis radii
        #[arg(long, value_parser = parse_list)]
        radius: List,
        /// Tail bound allowed relative to |rhs|
        #[arg(long, default_value_t = 1e-3)]
        tail_budget: f64,
        /// Absolute error target per one-dimensional integral
        #[arg(long, default_value_t = 1e-6)]
        quad_tol: f64,
        /// Largest acceptable relative error
        #[arg(long, default_value_t = 1e-2)]
        accept: f64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevyCommand {
    /// Reconstruct max^q(|x|, |y|) from its representation
    Check {
        #[arg(long)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        /// Largest acceptable relative error
        #[arg(long, default_value_t = 1e-6)]
        accept: f64,
        /// Refinements of the divergence probe (q > 1)
        #[arg(long, default_value_t = 12)]
        refinements: usize,
    },
    /// Build the representation and compare it with the norm on random points
    Repr {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecideCommand {
    /// Finite weight sequence
    Seq {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        q: f64,
    },
    /// Weight function on (0,1) or (0,inf)
    Fun {
        /// e.g. '{kind:linear,alpha:1}', '{"kind":"power","s":0.5}'
        #[arg(long)]
        weight_spec: String,
        #[arg(long)]
        q: f64,
        #[arg(long, value_parser = parse_levels, default_value = "2,3,4,5")]
        levels: Levels,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZonoCommand {
    /// Extreme points of the dual ball
    Vertices {
        #[command(flatten)]
        weights: WeightsArg,
        /// Largest number of vertices listed
        #[arg(long, default_value_t = 10_000)]
        limit: usize,
    },
    /// The face spanned by permuting the last three coordinates
    Face {
        #[command(flatten)]
        weights: WeightsArg,
        /// Write the polygon in OFF format
        #[arg(long, value_name = "FILE")]
        off: Option<PathBuf>,
    },
    /// Zonotope generators (arithmetic-progression weights)
    Generators {
        #[command(flatten)]
        weights: WeightsArg,
    },
    /// Face symmetry and support-function identity
    Check {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PosdefCommand {
    /// Smallest Gram eigenvalue over a given point set
    Gram {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        q: f64,
        /// JSON array of points
        #[arg(long, value_name = "FILE")]
        points: PathBuf,
    },
    /// Directed search for a negative eigenvalue
    Search {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        q: f64,
        /// Kernel evaluations
        #[arg(long, default_value_t = lorentz_embed::posdef::DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Random Gram matrices from mixed samplers
    Oracle {
        #[command(flatten)]
        weights: WeightsArg,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn render(cli: &Cli, outcome: &Outcome) -> Result<String, String> {
    match cli.format {
        Format::Csv => outcome
            .csv
            .clone()
            .ok_or_else(|| "CSV output is only available for `ft scan`".to_string()),
        Format::Json => {
            let mut doc = json!({
                "schema": SCHEMA,
                "config": cli,
            });
            if !cli.no_timestamp {
                doc["generated_unix"] = json!(timestamp());
            }
            doc["verdict"] = json!(outcome.verdict == Verdict::Yes);
            doc["result"] = outcome.result.clone();
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s)
        }
    }
}

fn run(cli: &Cli) -> u8 {
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Ft(FtCommand::Scan { .. })) {
        eprintln!("error: CSV output is only available for `ft scan`");
        return EXIT_USAGE;
    }
    let outcome = match commands::dispatch(cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_numeric_failure() { EXIT_NUMERIC } else { EXIT_USAGE };
        }
    };
    let text = match render(cli, &outcome) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = emit(cli, &text) {
        eprintln!("error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    match outcome.verdict {
        Verdict::Yes => 0,
        Verdict::No => EXIT_NO,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(&cli))
}

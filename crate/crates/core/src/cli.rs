//! Command-line front end.
//!
//! Exit codes: 0 success or equal, 1 not equal (or selftest failures),
//! 2 usage, parse or unsupported-fragment error, 3 unknown or residual.

use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::dataterm::Env;
use crate::dsl::{parse_data, parse_file, SourceFile};
use crate::eliminate::{eliminate_all, EliminationReport};
use crate::model::{alternatives_json, alternatives_text, axiom_selftest, evaluate, sem_equal};
use crate::normalize::{ctc_canonical_equal, to_btc_canonical, BtcCanonical, Verdict};
use crate::tuplix::Tuplix;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_EQUAL: u8 = 1;
pub const EXIT_ERROR: u8 = 2;
pub const EXIT_UNKNOWN: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "tuplix", about = "Normalize, evaluate and compare tuplix terms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eliminate derived operators and print the canonical form.
    Normalize {
        file: String,
        #[arg(long = "def")]
        name: String,
        /// Print the elimination steps.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Evaluate in the standard model.
    Eval {
        file: String,
        #[arg(long = "def")]
        name: String,
        /// `var=value`, where the value is a closed data expression.
        #[arg(long = "bind")]
        binds: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decide or refute equality of two definitions.
    Equal {
        file: String,
        #[arg(long = "def", num_args = 1, required = true)]
        names: Vec<String>,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the axioms against the standard model on random instances.
    Selftest {
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_ERROR, format!("error: {}\n", e))
    }
}

type Outcome = Result<(u8, String), Failure>;

/// Runs one command line (including the program name) and returns the exit
/// code with everything that should be printed.
pub fn run<I, S>(args: I) -> (u8, String)
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    let result = match cli.command {
        Command::Normalize {
            file,
            name,
            trace,
            format,
        } => normalize(&file, &name, trace, format),
        Command::Eval {
            file,
            name,
            binds,
            format,
        } => eval(&file, &name, &binds, format),
        Command::Equal {
            file,
            names,
            samples,
            seed,
        } => equal(&file, &names, samples, seed),
        Command::Selftest {
            samples,
            seed,
            format,
        } => Ok(selftest(samples, seed, format)),
    };
    match result {
        Ok(r) => r,
        Err(Failure(code, msg)) => (code, msg),
    }
}

fn load(path: &str) -> Result<SourceFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure(EXIT_ERROR, format!("error: {}: {}\n", path, e)))?;
    parse_file(&text).map_err(|e| Failure(EXIT_ERROR, format!("error: {}:{}\n", path, e)))
}

fn eliminated(term: &Tuplix) -> Result<EliminationReport, Failure> {
    let report = eliminate_all(term)?;
    if report.residual {
        return Err(Failure(
            EXIT_UNKNOWN,
            format!("residual: {}\nsome summation binder could not be eliminated\n", report.result),
        ));
    }
    Ok(report)
}

fn normalize(path: &str, name: &str, trace: bool, format: Format) -> Outcome {
    let file = load(path)?;
    let report = eliminate_all(file.get(name)?)?;
    let residual = report.residual;
    let mut out = String::new();
    let canonical = if residual {
        None
    } else {
        Some(to_btc_canonical(&report.result)?)
    };
    match format {
        Format::Text => {
            if trace {
                for step in &report.steps {
                    let _ = writeln!(out, "{}", step);
                }
            }
            match &canonical {
                Some(c) => {
                    let _ = writeln!(out, "{}", c);
                }
                None => {
                    let _ = writeln!(out, "residual: {}", report.result);
                }
            }
        }
        Format::Json => {
            let mut v = match &canonical {
                Some(c) => c.to_json(),
                None => json!({ "residual": report.result.to_string() }),
            };
            if trace {
                let steps: Vec<_> = report
                    .steps
                    .iter()
                    .map(|s| json!({ "rule": s.rule, "detail": s.detail }))
                    .collect();
                v["steps"] = json!(steps);
            }
            let _ = writeln!(out, "{}", v);
        }
    }
    Ok((if residual { EXIT_UNKNOWN } else { EXIT_OK }, out))
}

fn parse_bind(bind: &str) -> Result<(String, crate::meadow::Quantity), Failure> {
    let bad = || Failure(EXIT_ERROR, format!("error: bad binding {:?}, expected var=value\n", bind));
    let (var, value) = bind.split_once('=').ok_or_else(bad)?;
    let var = var.trim();
    if var.is_empty() {
        return Err(bad());
    }
    let q = parse_data(value)?.eval(&Env::new())?;
    Ok((var.to_string(), q))
}

fn eval(path: &str, name: &str, binds: &[String], format: Format) -> Outcome {
    let file = load(path)?;
    let mut env = Env::new();
    for b in binds {
        let (v, q) = parse_bind(b)?;
        env.insert(v, q);
    }
    let report = eliminated(file.get(name)?)?;
    let set = evaluate(&report.result, &env)?;
    let out = match format {
        Format::Json => format!("{}\n", alternatives_json(&set)),
        Format::Text => format!("{}\n", alternatives_text(&set)),
    };
    Ok((EXIT_OK, out))
}

fn show_env(env: &Env) -> String {
    if env.is_empty() {
        return "(closed terms)".to_string();
    }
    env.iter()
        .map(|(v, q)| format!("{} = {}", v, q))
        .collect::<Vec<_>>()
        .join(", ")
}

fn report_verdict(v: Verdict, how: &str) -> (u8, String) {
    match v {
        Verdict::Equal => (EXIT_OK, format!("equal ({})\n", how)),
        Verdict::NotEqual(env) => (
            EXIT_NOT_EQUAL,
            format!("not equal ({})\nwitness: {}\n", how, show_env(&env)),
        ),
        Verdict::Unknown { samples } => (
            EXIT_UNKNOWN,
            format!("unknown: passed {} samples\n", samples),
        ),
    }
}

fn equal(path: &str, names: &[String], samples: usize, seed: u64) -> Outcome {
    if names.len() != 2 {
        return Err(Failure(
            EXIT_ERROR,
            "error: equal takes exactly two --def options\n".to_string(),
        ));
    }
    let file = load(path)?;
    let s = eliminated(file.get(&names[0])?)?.result;
    let t = eliminated(file.get(&names[1])?)?.result;
    let cs: Option<BtcCanonical> = to_btc_canonical(&s).ok();
    let ct: Option<BtcCanonical> = to_btc_canonical(&t).ok();
    if let (Some(cs), Some(ct)) = (&cs, &ct) {
        if cs == ct {
            return Ok(report_verdict(Verdict::Equal, "identical canonical forms"));
        }
        if cs.is_closed() && ct.is_closed() {
            return Ok(report_verdict(sem_equal(&s, &t, samples, seed)?, "standard model"));
        }
        if cs.alternatives().len() <= 1 && ct.alternatives().len() <= 1 {
            let null = crate::normalize::CtcCanonical::null();
            let a = cs.alternatives().iter().next().unwrap_or(&null);
            let b = ct.alternatives().iter().next().unwrap_or(&null);
            let v = ctc_canonical_equal(a, b, samples, seed);
            if !matches!(v, Verdict::Unknown { .. }) {
                return Ok(report_verdict(v, "conjunctive canonical forms"));
            }
        }
    }
    Ok(report_verdict(sem_equal(&s, &t, samples, seed)?, "sampled"))
}

fn selftest(samples: usize, seed: u64, format: Format) -> (u8, String) {
    let report = axiom_selftest(samples, seed);
    let code = if report.total_failures() == 0 {
        EXIT_OK
    } else {
        EXIT_NOT_EQUAL
    };
    let out = match format {
        Format::Text => report.to_text(),
        Format::Json => format!("{}\n", report.to_json()),
    };
    (code, out)
}

//! Command-line front end: parses a model file and dispatches analysis
//! commands. Exit codes: 0 positive verdict, 1 negative verdict, 2 usage
//! error, 3 bounds exhausted.

use apn_cli::{commands, model};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use apn_core::oracle::Bounds;

#[derive(Parser)]
#[command(name = "apn", version, about = "Algebraic Petri net stability analyzer")]
struct Cli {
    /// Model file holding nets, equations, and machines.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Emit the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BoundArgs {
    /// Maximum ground term depth for oracle searches.
    #[arg(long, default_value_t = 2)]
    term_depth: usize,
    /// Maximum tokens per place for oracle searches.
    #[arg(long, default_value_t = 6)]
    max_tokens: u64,
    /// Maximum run length for reachability searches.
    #[arg(long, default_value_t = 6)]
    search_depth: usize,
    /// Candidate budget before giving up.
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        Bounds {
            term_depth: self.term_depth,
            tokens_per_place: self.max_tokens,
            search_depth: self.search_depth,
            candidate_cap: self.cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide stability of an equation under one or all transitions.
    CheckStability {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        transition: Option<String>,
    },
    /// Test the place-invariant sufficient criterion.
    CheckInvariant {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        transition: Option<String>,
    },
    /// Check whether a named marking satisfies an equation.
    Satisfies {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        marking: String,
    },
    /// Fire a script of steps like `t(X = c)` from a named marking.
    Simulate {
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        marking: String,
        /// Repeatable; fired in order.
        #[arg(long)]
        step: Vec<String>,
    },
    /// Enumerate the spanning set of zeros of an equation.
    Zeros {
        #[arg(long)]
        equation: String,
        /// Drop zeros with duplicate count vectors.
        #[arg(long)]
        minimize: bool,
    },
    /// List the substitutions derivable from the spanning set.
    Derive {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        transition: String,
    },
    /// Three-valued validity: stability criterion, then bounded search.
    Validity {
        #[arg(long)]
        equation: String,
        #[arg(long)]
        net: Option<String>,
        #[arg(long)]
        marking: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Encode a counter machine as a net with its halting equation.
    EncodeMinsky {
        #[arg(long)]
        machine: String,
    },
}

fn dispatch(cli: &Cli) -> Result<commands::Outcome, commands::UsageError> {
    let path = cli
        .model
        .as_ref()
        .ok_or_else(|| commands::UsageError("--model FILE is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| commands::UsageError(format!("cannot read {}: {}", path.display(), e)))?;
    let model = model::parse_model(&text)
        .map_err(|e| commands::UsageError(format!("{}: {}", path.display(), e)))?;
    match &cli.command {
        Command::CheckStability {
            equation,
            net,
            transition,
        } => commands::check_stability(&model, equation, net.as_deref(), transition.as_deref()),
        Command::CheckInvariant {
            equation,
            net,
            transition,
        } => commands::check_invariant(&model, equation, net.as_deref(), transition.as_deref()),
        Command::Satisfies {
            equation,
            net,
            marking,
        } => commands::cmd_satisfies(&model, equation, net.as_deref(), marking),
        Command::Simulate { net, marking, step } => {
            commands::simulate(&model, net.as_deref(), marking, step)
        }
        Command::Zeros { equation, minimize } => commands::zeros(&model, equation, *minimize),
        Command::Derive {
            equation,
            net,
            transition,
        } => commands::derive(&model, equation, net.as_deref(), transition),
        Command::Validity {
            equation,
            net,
            marking,
            bounds,
        } => commands::validity(&model, equation, net.as_deref(), marking, &bounds.bounds()),
        Command::EncodeMinsky { machine } => commands::encode_minsky(&model, machine),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.report).expect("serializable")
                );
            } else {
                print!("{}", outcome.text);
            }
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(commands::EXIT_USAGE as u8)
        }
    }
}

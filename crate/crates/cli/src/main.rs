//! `ci-reduce`: prediction-preserving reduction of Java methods against a
//! code-model oracle, plus the comparison, feature and adversarial reports
//! built on top of it.

mod analysis;
mod artifacts;
mod config;
mod corpus_cmd;
mod inputs;
mod reduce;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use ci_reduce_core::lang::Program;
use ci_reduce_core::tree_reduce::list_deletable;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

/// Outcome of a command that got past configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// Some inputs failed; the rest were written.
    Partial,
}

#[derive(Parser)]
#[command(name = "ci-reduce", version, about = "Prediction-preserving program reduction for code models")]
struct Cli {
    /// More log output (repeat for debug); RUST_LOG also works.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a source tree into method records and draw seeded samples.
    Corpus(corpus_cmd::CorpusCmd),
    /// Reduce inputs with one or more techniques.
    Reduce(reduce::ReduceCmd),
    /// Run several techniques on the same inputs and aggregate the traces.
    Compare(reduce::CompareCmd),
    /// Key and sparse features of one label's reduced programs.
    Features(analysis::FeaturesCmd),
    /// Rename variables and measure how often the label changes.
    Adversarial(analysis::AdversarialCmd),
    /// Dump the parse tree of a method as JSON.
    ShowTree(ShowTree),
}

#[derive(Args)]
struct ShowTree {
    /// Method source file.
    input: PathBuf,
}

fn show_tree(args: &ShowTree) -> Result<Status> {
    let program = Program::new(config::read(&args.input)?);
    let Some(tree) = program.tree() else {
        bail!("{}: {}", args.input.display(), program.error().expect("unparsed program has an error"));
    };
    let deletable: Vec<_> = list_deletable(tree)
        .into_iter()
        .map(|(path, node)| {
            let texts: Vec<&str> = node.frontier().iter().map(|t| t.text.as_str()).collect();
            json!({
                "path": path,
                "rule": node.rule.name(),
                "deletability": node.deletability,
                "text": ci_reduce_core::lang::join_tokens(texts),
            })
        })
        .collect();
    let dump = json!({
        "token_count": program.token_count(),
        "tree": tree.to_json(),
        "deletable": deletable,
    });
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{}", serde_json::to_string_pretty(&dump)?) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(Status::Ok),
    }
}

fn run(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Corpus(c) => corpus_cmd::cmd_corpus(c),
        Command::Reduce(c) => reduce::cmd_reduce(c),
        Command::Compare(c) => reduce::cmd_compare(c),
        Command::Features(c) => analysis::cmd_features(c),
        Command::Adversarial(c) => analysis::cmd_adversarial(c),
        Command::ShowTree(c) => show_tree(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

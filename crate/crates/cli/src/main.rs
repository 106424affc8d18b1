//! Batch driver for the omitting-types engine.
//!
//! Subcommands: `ordinal eval|fundseq`, `tree rank|truncate`, `theory gen`,
//! `closure run`, `entails`, `ktranslate`. Reports go to standard output
//! (JSON by default), diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 property violation in `--check` mode, 2 input
//! error, 3 step budget exhausted.

mod report;
mod run;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "otypes", version, about = "Omitting-types closure engine")]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "text"])]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ordinal arithmetic in Cantor normal form.
    Ordinal {
        #[command(subcommand)]
        command: OrdinalCmd,
    },
    /// Well-founded trees and their ranks.
    Tree {
        #[command(subcommand)]
        command: TreeCmd,
    },
    /// Theory generators.
    Theory {
        #[command(subcommand)]
        command: TheoryCmd,
    },
    /// The closure calculus.
    Closure {
        #[command(subcommand)]
        command: ClosureCmd,
    },
    /// Entailment over a schematic theory.
    Entails(EntailsArgs),
    /// Second-order arithmetic into the K-language.
    Ktranslate(KtranslateArgs),
}

#[derive(Subcommand)]
enum OrdinalCmd {
    /// Parse and normalize an ordinal expression.
    Eval {
        /// Ordinal expression, e.g. "w^2*3 + w + 4".
        expr: String,
    },
    /// Members of the fundamental sequence of a limit ordinal.
    Fundseq {
        /// The limit ordinal.
        expr: String,
        /// First index to report.
        #[arg(long, default_value_t = 0)]
        index: u64,
        /// How many members to report.
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Subcommand)]
enum TreeCmd {
    /// The rank of a node, in a canonical tree or an explicit one.
    Rank {
        /// Canonical tree of this rank.
        #[arg(long, conflicts_with = "paths")]
        alpha: Option<String>,
        /// Explicit tree: semicolon-separated paths, closed under prefixes.
        #[arg(long)]
        paths: Option<String>,
        /// The node, e.g. "<2,0>".
        #[arg(long, default_value = "<>")]
        path: String,
    },
    /// The finite truncation of a canonical tree.
    Truncate {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        width: u64,
        #[arg(long)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum TheoryCmd {
    /// Emit a theory document (with its default candidate pool).
    Gen(GenArgs),
}

#[derive(Args)]
struct GenArgs {
    /// One of: rank2, tree.
    #[arg(long)]
    family: String,
    /// For --family tree: random tree seed.
    #[arg(long)]
    seed: Option<u64>,
    /// For --family tree with --seed: node budget.
    #[arg(long, default_value_t = 8)]
    max_nodes: usize,
    /// For --family tree: truncate the canonical tree of this rank.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 3)]
    width: u64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// For --family tree: explicit semicolon-separated paths.
    #[arg(long)]
    paths: Option<String>,
}

#[derive(Subcommand)]
enum ClosureCmd {
    /// Run the closure to a fixpoint or an inconsistency.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Built-in family: rank2.
    #[arg(long, conflicts_with = "tree")]
    family: Option<String>,
    /// Tree source: random | alpha | paths.
    #[arg(long)]
    tree: Option<String>,
    /// Seed for --tree random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budget for --tree random.
    #[arg(long, default_value_t = 8)]
    max_nodes: usize,
    /// Rank for --tree alpha.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, default_value_t = 3)]
    width: u64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Explicit paths for --tree paths, semicolon separated.
    #[arg(long)]
    paths: Option<String>,
    /// A theory document produced by `theory gen` (or by hand).
    #[arg(long, conflicts_with_all = ["family", "tree"])]
    theory_file: Option<String>,
    /// Candidate pool override: semicolon-separated formulas, or `*F` for
    /// the whole family F.
    #[arg(long)]
    pool: Option<String>,
    #[arg(long, default_value_t = 32)]
    max_steps: u64,
    /// Fresh-representative probes per index quantification.
    #[arg(long, default_value_t = 1)]
    probes: u64,
    /// Cross-validate the ledger against the tree-rank oracle.
    #[arg(long, default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct EntailsArgs {
    /// A theory document.
    #[arg(long)]
    theory_file: String,
    /// The sentence to decide.
    #[arg(long)]
    sentence: String,
    /// Extra premises, semicolon separated.
    #[arg(long)]
    assuming: Option<String>,
    /// Cross-validate against brute-force model enumeration (small
    /// signatures only).
    #[arg(long, default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct KtranslateArgs {
    /// A second-order formula, e.g. "EX X. E n. n in X".
    formula: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text_mode = cli.format == "text";
    match run::dispatch(cli.command, text_mode) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(run::exit_code_for(&err))
        }
    }
}

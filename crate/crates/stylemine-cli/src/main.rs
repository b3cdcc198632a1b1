//! Pipeline driver: parse corpora, export embeddings, mine parallel groups,
//! distill articles, compute rewards, serve the reward protocol, evaluate
//! transfers, and report dataset statistics. Every run writes a manifest
//! beside its primary output.

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};

use config::ConfigOverrides;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, missing/malformed inputs, schema mismatches. Exit 1.
    Validation(String),
    /// Failures after validation: io, remote provider, internal. Exit 2.
    Runtime(String),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    pub fn from_validation(e: stylemine::Error) -> Self {
        CliError::Validation(e.to_string())
    }

    pub fn from_runtime(e: stylemine::Error) -> Self {
        CliError::Runtime(e.to_string())
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "stylemine", version, about = "Style-transfer corpus mining, reward, and evaluation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a raw corpus: tokenize, lemmatize, attach scene entities.
    Parse(commands::ParseArgs),
    /// Export sentence embeddings for a corpus.
    Embed(commands::EmbedArgs),
    /// Mine roughly parallel groups from two corpora.
    Mine(commands::MineArgs),
    /// Select stance-salient sentences from articles under a budget.
    Distill(commands::DistillArgs),
    /// Batch-compute reward breakdowns from a request file.
    Reward(commands::RewardArgs),
    /// Serve the newline-delimited reward protocol over stdio or TCP.
    Serve(commands::ServeArgs),
    /// Evaluate transferred text against references.
    Eval(commands::EvalArgs),
    /// Dataset statistics for mined groups.
    Stats(commands::StatsArgs),
}

fn overrides_of(command: &Command) -> &ConfigOverrides {
    match command {
        Command::Parse(a) => &a.overrides,
        Command::Embed(a) => &a.overrides,
        Command::Mine(a) => &a.overrides,
        Command::Distill(a) => &a.overrides,
        Command::Reward(a) => &a.overrides,
        Command::Serve(a) => &a.overrides,
        Command::Eval(a) => &a.overrides,
        Command::Stats(a) => &a.overrides,
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        // clap already formats usage errors; --help/--version are not errors.
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                std::process::exit(0);
            }
            _ => CliError::validation(e.to_string()),
        }
    })?;

    let config = config::resolve(overrides_of(&cli.command))?;
    if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()
            .map_err(|e| CliError::runtime(format!("worker pool: {e}")))?;
    }

    match cli.command {
        Command::Parse(args) => commands::parse(&args, &config),
        Command::Embed(args) => commands::embed(&args, &config),
        Command::Mine(args) => commands::mine(&args, &config),
        Command::Distill(args) => commands::distill(&args, &config),
        Command::Reward(args) => commands::reward(&args, &config),
        Command::Serve(args) => commands::serve(&args, &config),
        Command::Eval(args) => commands::eval(&args, &config),
        Command::Stats(args) => commands::stats(&args, &config),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("stylemine: {}", e.message());
        std::process::exit(e.code());
    }
}

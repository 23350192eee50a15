mod commands;
mod config;
mod rows;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "mel", version, about = "Multimodal entity linking: forge data, train scorers, evaluate")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON run configuration. Missing keys take defaults, unknown keys are errors.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Master seed, overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Modality or feature mask for train-jmel, train-fusion, train-et and
    /// ablate, e.g. `s2v+img` or `jmel+pop+bm25`.
    #[arg(long, global = true)]
    mask: Option<String>,

    /// Output directory, overrides `paths.out` in the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Forge a synthetic knowledge base with ambiguous mentions and a split.
    Forge,
    /// Generate the feature store for every tweet in the dataset.
    Features,
    /// Build the BM25 timeline index.
    Index,
    /// Train a joint embedding model (default mask s2v+img).
    TrainJmel,
    /// Train the fusion classifier (default mask jmel+pop+bm25).
    TrainFusion,
    /// Train an Extra-Trees pair classifier (default mask s2v+img+pop+bm25).
    TrainEt,
    /// Evaluate the configured rows; writes results.csv and results.txt.
    Eval,
    /// Text vs text+image comparison per feature store.
    Ablate,
    /// Dataset statistics; writes stats.txt and stats.csv.
    Stats,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(mel_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(mel_core::Error::Config(_)) => 1,
            CliError::Core(mel_core::Error::Numeric(_)) => 3,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<mel_core::Error> for CliError {
    fn from(e: mel_core::Error) -> Self {
        CliError::Core(e)
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.paths.out = out.clone();
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = resolve(&cli)?;
    let mask = cli.mask.as_deref();
    match cli.command {
        Command::Forge => commands::forge(&config),
        Command::Features => commands::features(&config),
        Command::Index => commands::index(&config),
        Command::TrainJmel => commands::train_jmel(&config, mask),
        Command::TrainFusion => commands::train_fusion(&config, mask),
        Command::TrainEt => commands::train_et(&config, mask),
        Command::Eval => commands::eval(&config),
        Command::Ablate => commands::ablate(&config, mask),
        Command::Stats => commands::stats(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.mask.is_some() && !matches!(
        cli.command,
        Command::TrainJmel | Command::TrainFusion | Command::TrainEt | Command::Ablate
    ) {
        eprintln!("mel: usage: --mask is not used by this subcommand");
        return ExitCode::from(1);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mel: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(mel_core::Error::Config("x".into())).exit_code(), 1);
        assert_eq!(CliError::Core(mel_core::Error::MissingArtifact("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(mel_core::Error::Data("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(mel_core::Error::Numeric("x".into())).exit_code(), 3);
    }

    #[test]
    fn flags_override_the_config() {
        let cli = Cli::try_parse_from(["mel", "stats", "--seed", "9", "--out", "/tmp/o"]).unwrap();
        let c = resolve(&cli).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.paths.out, PathBuf::from("/tmp/o"));
    }
}

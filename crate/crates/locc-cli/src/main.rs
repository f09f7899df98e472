use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use locc_cli::commands::{
    cmd_analyze, cmd_classify, cmd_detect, cmd_ensembles, cmd_mark, cmd_reproduce, CommandOutput,
    Source,
};
use locc_cli::config::{OutputFormat, RunConfig};
use locc_cli::CliError;
use locc_core::protocol::YuMode;

/// Conclusive LOCC discrimination and marking analyzer.
#[derive(Parser)]
#[command(name = "locc-marker", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    #[value(name = "strict01")]
    Strict01,
    #[value(name = "any_anticorrelated", alias = "any-anticorrelated")]
    AnyAnticorrelated,
}

#[derive(Args)]
struct CommonArgs {
    /// Named ensemble from the registry (see `ensembles`).
    #[arg(long)]
    named: Option<String>,
    /// Path to an ensemble JSON document.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Local dimension for parameterized ensembles (yu).
    #[arg(long)]
    d: Option<usize>,
    /// Heuristic search seed (LOCC_MARKER_SEED overrides).
    #[arg(long)]
    seed: Option<u64>,
    /// Heuristic restarts.
    #[arg(long)]
    restarts: Option<u32>,
    /// Branch-enumeration cap.
    #[arg(long)]
    branch_cap: Option<u64>,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(restarts) = self.restarts {
            cfg.restarts = restarts;
        }
        if let Some(cap) = self.branch_cap {
            cfg.branch_cap = cap;
        }
        cfg.format = match self.format {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
        };
        cfg.finalize()
    }

    fn source(&self) -> Result<Source, CliError> {
        Source::from_flags(self.named.clone(), self.file.clone(), self.d)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Independence, discrimination, and optional marking analysis.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Also analyze the m-fold marking set.
        #[arg(long)]
        m: Option<usize>,
    },
    /// UB / GUB / UPB / GUPB classification.
    Classify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Detecting-state search for one target or every member.
    Detect {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        target: Option<String>,
    },
    /// Build and simulate a marking protocol.
    Mark {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Detection rule for the mixed-pair protocol.
        #[arg(long, value_enum, default_value_t = ModeArg::AnyAnticorrelated)]
        mode: ModeArg,
    },
    /// Re-run the claim registry (ids or `all`).
    Reproduce {
        #[command(flatten)]
        common: CommonArgs,
        /// Claim ids; defaults to `all`.
        ids: Vec<String>,
    },
    /// List named ensembles, or dump one as JSON with --named.
    Ensembles {
        #[command(flatten)]
        common: CommonArgs,
        /// Dump the m-fold marking set instead of the base ensemble.
        #[arg(long)]
        m: Option<usize>,
    },
}

fn emit(output: &CommandOutput, cfg: &RunConfig, out: Option<&PathBuf>) -> Result<(), CliError> {
    let rendered = match cfg.format {
        OutputFormat::Text => output.text.clone(),
        OutputFormat::Json => {
            serde_json::to_string_pretty(&output.json).expect("serializable report")
        }
    };
    match out {
        Some(path) => std::fs::write(path, rendered + "\n")
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            println!("{rendered}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, CliError> {
    let cli = Cli::parse();
    let (output, common) = match &cli.command {
        Command::Analyze { common, m } => {
            let cfg = common.config()?;
            (cmd_analyze(&common.source()?, *m, &cfg)?, common)
        }
        Command::Classify { common } => {
            let cfg = common.config()?;
            (cmd_classify(&common.source()?, &cfg)?, common)
        }
        Command::Detect { common, target } => {
            let cfg = common.config()?;
            (cmd_detect(&common.source()?, target.clone(), &cfg)?, common)
        }
        Command::Mark { common, m, mode } => {
            let cfg = common.config()?;
            let mode = match mode {
                ModeArg::Strict01 => YuMode::Strict01,
                ModeArg::AnyAnticorrelated => YuMode::AnyAnticorrelated,
            };
            (cmd_mark(&common.source()?, *m, mode, &cfg)?, common)
        }
        Command::Reproduce { common, ids } => {
            let cfg = common.config()?;
            let ids = if ids.is_empty() { vec!["all".to_string()] } else { ids.clone() };
            (cmd_reproduce(&ids, &cfg)?, common)
        }
        Command::Ensembles { common, m } => {
            let source = if common.named.is_some() || common.file.is_some() {
                Some(common.source()?)
            } else {
                None
            };
            (cmd_ensembles(source.as_ref(), *m)?, common)
        }
    };
    let cfg = common.config()?;
    emit(&output, &cfg, common.out.as_ref())?;
    Ok(output.claim_failure)
}

fn main() -> ExitCode {
    match run() {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

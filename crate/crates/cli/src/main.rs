use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smcf_cli::output::emit_json;
use smcf_cli::{run, CliResult, RunConfig};

/// Spectral solver for skew mean curvature flow in the harmonic/Coulomb gauge.
#[derive(Parser)]
#[command(name = "smcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides in the form `--section.key=value`, applied after the file.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY=VALUE"
    )]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = &self.config {
            cfg.apply_file(p)?;
        }
        cfg.apply_overrides(&self.overrides)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured data and write CSV, JSON and checkpoints.
    Run {
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Solve the gauge system once for the configured data.
    Elliptic {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Compare the gauged evolution with a direct immersion flow.
    Oracle {
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Spatial norm table of the field stored in a checkpoint.
    Norms {
        checkpoint: PathBuf,
        #[command(flatten)]
        args: ConfigArgs,
    },
    /// Classify Strichartz exponent pairs `(q, r)` and `(q̃, r̃)`.
    CheckPairs {
        #[arg(long, short)]
        d: usize,
        q: String,
        r: String,
        q_tilde: String,
        r_tilde: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { resume, args } => {
            let cfg = args.load()?;
            let summary = run::run(&cfg, resume.as_deref())?;
            if cfg.output.json.is_none() || args.out.is_some() {
                emit_json(&summary, args.out.as_deref())?;
            }
            Ok(())
        }
        Command::Elliptic { args } => {
            emit_json(&run::elliptic(&args.load()?)?, args.out.as_deref())
        }
        Command::Oracle { args } => emit_json(&run::oracle(&args.load()?)?, args.out.as_deref()),
        Command::Norms { checkpoint, args } => emit_json(
            &run::norms(&args.load()?, &checkpoint)?,
            args.out.as_deref(),
        ),
        Command::CheckPairs {
            d,
            q,
            r,
            q_tilde,
            r_tilde,
            out,
        } => emit_json(
            &run::check_pairs(d, &q, &r, &q_tilde, &r_tilde)?,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("smcf: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

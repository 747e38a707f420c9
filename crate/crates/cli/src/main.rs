use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use recon_cli::commands::{self, threads_from_env};
use recon_cli::config::{parse_entries, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "recon",
    about = "Rate-adaptive LDPC reconciliation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Efficiency and FER of the sp-protocol over a crossover grid (CSV).
    Sweep(ExperimentArgs),
    /// Empirical efficiency f(p_err) per grid point ("p_err f" lines).
    Calibrate(ExperimentArgs),
    /// Cascade baseline over the grid (CSV).
    Cascade(ExperimentArgs),
    /// Min-entropy budget after reconciliation.
    Keybudget {
        #[arg(long)]
        h_min: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value = "80")]
        t: String,
    },
    /// Parse an alist file and report its parameters.
    AlistCheck {
        path: PathBuf,
        /// Skip the GF(2) rank check (large codes).
        #[arg(long)]
        no_rank_check: bool,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "f-eff")]
    f_eff: Option<String>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    length: Option<usize>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut entries = match &self.config {
            Some(path) => parse_entries(
                &std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?,
            )?,
            None => BTreeMap::new(),
        };
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                entries.insert(key.to_owned(), v);
            }
        };
        set("code", self.code.clone());
        set("grid", self.grid.clone());
        set("seed", self.seed.map(|v| v.to_string()));
        set("frames", self.frames.map(|v| v.to_string()));
        set("out", self.out.as_ref().map(|p| p.display().to_string()));
        set("delta", self.delta.map(|v| v.to_string()));
        set("f_eff", self.f_eff.clone());
        set("t", self.t.map(|v| v.to_string()));
        set("length", self.length.map(|v| v.to_string()));
        ExperimentConfig::from_entries(&entries)
    }
}

fn emit(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let cfg = args.resolve()?;
            emit(&cfg, &commands::cmd_sweep(&cfg, threads_from_env()?)?)
        }
        Command::Calibrate(args) => {
            let cfg = args.resolve()?;
            emit(&cfg, &commands::cmd_calibrate(&cfg, threads_from_env()?)?)
        }
        Command::Cascade(args) => {
            let cfg = args.resolve()?;
            emit(&cfg, &commands::cmd_cascade(&cfg, threads_from_env()?)?)
        }
        Command::Keybudget {
            h_min,
            n,
            k,
            s,
            p,
            t,
        } => {
            print!("{}", commands::cmd_keybudget(&h_min, n, k, s, p, &t)?);
            Ok(())
        }
        Command::AlistCheck {
            path,
            no_rank_check,
        } => {
            print!("{}", commands::cmd_alist_check(&path, !no_rank_check)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

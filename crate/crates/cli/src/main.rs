// Copyright 2026 The trimer-tw Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trimer_cli::compare::{compare, write_report};
use trimer_cli::error::CliError;
use trimer_cli::meanfield::meanfield;
use trimer_cli::oracle_cmd::oracle;
use trimer_cli::run::{load_config, run, Overrides};

#[derive(Parser)]
#[command(name = "trimer", version, about = "Truncated Wigner simulations of a driven dissipative Bose-Hubbard trimer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the configured system by a named preset.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a trajectory ensemble and write all analysis artifacts.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_traj: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare two output directories in units of combined standard error.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail with exit status 5 if any |z| exceeds this.
        #[arg(long)]
        threshold: Option<f64>,
        /// Write the per-quantity differences to this CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classical and ensemble population series for plotting.
    Meanfield {
        #[command(flatten)]
        common: Common,
        /// Skip the trajectory ensemble.
        #[arg(long)]
        classical_only: bool,
    },
    /// Exact master-equation moments in a truncated Fock basis.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        preset: c.preset.clone(),
        out: c.out.clone(),
        ..Overrides::default()
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            common,
            n_traj,
            seed,
            workers,
        } => {
            let o = Overrides {
                n_traj,
                seed,
                workers,
                ..overrides(&common)
            };
            let cfg = load_config(common.config.as_deref(), &o)?;
            let m = run(&cfg)?;
            println!("wrote {} files to {}", m.files.len(), cfg.output.dir.display());
        }
        Command::Compare { a, b, threshold, out } => {
            let c = compare(&a, &b)?;
            if let Some(path) = &out {
                write_report(path, &c)?;
            }
            println!(
                "compared {} quantities in {}; max |z| = {}",
                c.differences.len(),
                c.files.join(", "),
                c.max_abs_z()
            );
            if let Some(w) = c.worst() {
                println!("largest: {} {} at t = {} (a = {}, b = {}, z = {})", w.file, w.quantity, w.t, w.a, w.b, w.z);
            }
            for s in &c.skipped {
                println!("skipped {s}: present in one directory only");
            }
            if let Some(z) = threshold {
                let n = c.exceeding(z);
                if n > 0 {
                    return Err(CliError::Threshold(format!("{n} quantities exceed |z| = {z}")));
                }
            }
        }
        Command::Meanfield {
            common,
            classical_only,
        } => {
            let cfg = load_config(common.config.as_deref(), &overrides(&common))?;
            let m = meanfield(&cfg, classical_only)?;
            println!("wrote {} files to {}", m.files.len(), cfg.output.dir.display());
        }
        Command::Oracle { common } => {
            let cfg = load_config(common.config.as_deref(), &overrides(&common))?;
            let m = oracle(&cfg)?;
            println!("wrote {} files to {}", m.files.len(), cfg.output.dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

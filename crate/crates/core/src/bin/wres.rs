use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warped_residue::cli;
use warped_residue::config::{Overrides, RunConfig};
use warped_residue::residue::Mode;

/// Noncommutative residue of a warped Laplacian against the product Laplacian.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the residue density and write the report.
    Run {
        config: PathBuf,
        /// JSON report path (overrides output.json)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// nodes per axis on M and N, as `M,N`
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        /// switch to finite differences with this first-derivative step
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the oracle suite on the configured geometry.
    Check {
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: warped_residue::error::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (m, n) = s.split_once(',').ok_or("expected M,N")?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v}: {e}"));
    Ok((p(m)?, p(n)?))
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("WRES_THREADS") {
        let n: usize = v.parse().map_err(|_| format!("WRES_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let outcome = match args.command {
        Command::Run { config, out, mode, grid, fd_step, quiet } => RunConfig::from_path(&config)
            .and_then(|mut cfg| {
                cfg.apply(&Overrides { json: None, mode, grid, fd_step })?;
                if let Some(p) = out {
                    // --out is relative to the working directory, not the config
                    cfg.output.json = Some(std::path::absolute(&p)?);
                }
                cli::run(&cfg)
            })
            .map(|report| {
                if !quiet {
                    print!("{}", report.summary());
                }
                report.passed()
            }),
        Command::Check { config, quiet } => RunConfig::from_path(&config).and_then(|cfg| cli::check(&cfg)).map(|r| {
            if !quiet {
                print!("{}", r.summary());
            }
            r.passed()
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

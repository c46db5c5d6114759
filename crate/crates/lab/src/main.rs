use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use sgkink::config::ExperimentKind;
use sgkink::{run_experiment, write_report, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sgkink", version, about = "Sine-Gordon kink experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run experiments and write their reports.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Output directory; one subdirectory per config when several are given.
        #[arg(long)]
        out: PathBuf,
    },
    /// List the available experiments.
    List,
    /// Check configs without running them.
    Validate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

fn out_dir(base: &Path, cfg: &Path, many: bool) -> PathBuf {
    if many {
        let stem = cfg.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "run".into());
        base.join(stem)
    } else {
        base.to_path_buf()
    }
}

/// Returns whether the run completed with all tolerances met.
fn run_one(path: &Path, dir: &Path) -> bool {
    let result = ExperimentConfig::load(path).and_then(|cfg| {
        let report = run_experiment(&cfg)?;
        write_report(&report, dir)?;
        Ok(report)
    });
    match result {
        Ok(report) => {
            let mut text = format!("{} ({})\n", path.display(), report.config.name.as_str());
            for c in &report.checks {
                text.push_str(&format!("  {}\n", c.describe()));
            }
            print!("{text}");
            report.passed()
        }
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            false
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ok = match cli.command {
        Command::List => {
            for k in ExperimentKind::ALL {
                println!("{:<22} {}", k.as_str(), k.describe());
            }
            true
        }
        Command::Validate { configs } => configs.iter().fold(true, |ok, p| match ExperimentConfig::load(p) {
            Ok(c) => {
                println!("{}: ok ({})", p.display(), c.name.as_str());
                ok
            }
            Err(e) => {
                eprintln!("{}: {e}", p.display());
                false
            }
        }),
        Command::Run { configs, out } => {
            let threads = std::env::var("SGKINK_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .unwrap_or(0);
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
            let many = configs.len() > 1;
            let work = || {
                configs
                    .par_iter()
                    .map(|p| run_one(p, &out_dir(&out, p, many)))
                    .collect::<Vec<bool>>()
            };
            let results = match pool {
                Ok(pool) => pool.install(work),
                Err(e) => {
                    eprintln!("thread pool: {e}");
                    return ExitCode::FAILURE;
                }
            };
            results.into_iter().all(|b| b)
        }
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

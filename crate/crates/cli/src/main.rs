//! `uavbs` command-line driver.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration or usage error,
//! 3 checkpoint mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uavbs::harness::{
    compare_methods, export_figure_data, run_inference, run_training, FigureKey, Preset,
    RunOptions, ScenarioConfig, SEED_ENV,
};
use uavbs::marl::Method;
use uavbs::Error;

#[derive(Parser)]
#[command(name = "uavbs", version, about = "Multi-UAV aerial base-station simulator and trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one method and write a run directory.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory (defaults to `output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue an interrupted run in the same directory.
        #[arg(long)]
        resume: bool,
    },
    /// Run greedy episodes with a trained checkpoint.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkpoint file or run directory; not needed for the random method.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<u64>,
        /// Where to write the step-by-step trace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and evaluate several methods over several seeds.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        #[arg(long, value_delimiter = ',', required = true)]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one figure table from a run directory.
    Export {
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        figure: FigureKey,
    },
}

fn scenario(config: Option<&Path>, preset: Option<Preset>, seed: Option<u64>) -> uavbs::Result<ScenarioConfig> {
    let cfg = match config {
        Some(p) => ScenarioConfig::load(p, preset)?,
        None => ScenarioConfig::from_toml_str("", preset)?,
    };
    let env = std::env::var(SEED_ENV).ok();
    cfg.with_seed_override(seed, env.as_deref())
}

fn run(cmd: Command) -> uavbs::Result<()> {
    match cmd {
        Command::Train {
            config,
            preset,
            seed,
            out,
            resume,
        } => {
            let mut cfg = scenario(config.as_deref(), preset, seed)?;
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let s = run_training(
                &cfg,
                &RunOptions {
                    resume,
                    stop_after: None,
                },
            )?;
            println!(
                "{}: {} epochs of {} (seed {}, {:?})",
                s.run_dir.display(),
                s.manifest.epochs_done,
                s.manifest.method,
                s.manifest.seed,
                s.manifest.seed_source
            );
            if let Some(e) = s.final_eval {
                println!(
                    "eval over {} episodes: reward {:.4} +- {:.4}, support rate {:.4}, qos {:.4}",
                    e.episodes, e.mean_reward, e.std_reward, e.support_rate, e.total_qos
                );
            }
        }
        Command::Eval {
            config,
            checkpoint,
            preset,
            seed,
            episodes,
            out,
        } => {
            let mut cfg = scenario(config.as_deref(), preset, seed)?;
            if let Some(n) = episodes {
                cfg.train.eval_episodes = n;
            }
            let rep = run_inference(&cfg, checkpoint.as_deref(), out.as_deref())?;
            let text = serde_json::to_string_pretty(&rep.summary)
                .map_err(|e| Error::State(e.to_string()))?;
            println!("{text}");
        }
        Command::Compare {
            config,
            preset,
            methods,
            seeds,
            out,
        } => {
            let cfg = scenario(config.as_deref(), preset, None)?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let c = compare_methods(&cfg, &methods, &seeds, &dir)?;
            let text = std::fs::read_to_string(&c.summary_path)
                .map_err(|e| Error::io(&c.summary_path, e))?;
            print!("{text}");
        }
        Command::Export { run, figure } => {
            let p = export_figure_data(&run, figure)?;
            println!("{}", p.display());
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Checkpoint(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

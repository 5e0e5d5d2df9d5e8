use std::path::PathBuf;
use std::process::ExitCode;

use blossom_core::pipeline::{PipelineError, ScenarioConfig, StrategyChoice};
use blossom_core::scene::generate_scene;
use blossom_sim::annotation::load_annotations;
use blossom_sim::config::{default_config_commented, load_config};
use blossom_sim::decision_log::load_log;
use blossom_sim::report::{plain_report, Format};
use blossom_sim::runner::{poses_csv, replay, run_replicates, write_meta, write_replay, write_run};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_IO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "blossom", version, about = "Robotic blossom-thinning simulator", args_conflicts_with_subcommands = true)]
struct Cli {
    /// Print the default scenario configuration and exit.
    #[arg(long)]
    dump_default_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Boundary,
    Center,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate scenes, or summarize a recorded decision log with --replay.
    Run {
        #[arg(long, required_unless_present = "replay")]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        #[arg(long)]
        replicates: Option<u32>,
        /// Decision log to summarize instead of simulating.
        #[arg(long, conflicts_with_all = ["seed", "strategy", "replicates"])]
        replay: Option<PathBuf>,
        #[arg(long, env = "BLOSSOM_OUT_DIR", default_value = "blossom-out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "delimited")]
        format: Format,
        /// Worker threads; outputs are identical for any value.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Estimate poses for annotated clusters and print them as CSV.
    Poses {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print a generated scene as JSON.
    Scene {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn config_or_default(path: Option<&PathBuf>) -> Result<ScenarioConfig, ExitCode> {
    match path {
        Some(p) => load_config(p).map_err(|e| fail(EXIT_INPUT, e)),
        None => Ok(ScenarioConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.dump_default_config {
        print!("{}", default_config_commented());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        return fail(EXIT_INPUT, "no command given; try --help");
    };
    match command {
        Command::Run { config, seed, strategy, replicates, replay: replay_path, out, format, jobs } => {
            if let Some(path) = replay_path {
                let records = match load_log(&path) {
                    Ok(r) => r,
                    Err(e) => return fail(EXIT_INPUT, format_args!("{}: {e}", path.display())),
                };
                let summaries = match replay(&records) {
                    Ok(s) => s,
                    Err(e) => return fail(EXIT_INPUT, format_args!("{}: {e}", path.display())),
                };
                if let Err(e) = write_replay(&out, &summaries, format) {
                    return fail(EXIT_IO, e);
                }
                finish(&out, &plain_report(&summaries))
            } else {
                let mut cfg = match config_or_default(config.as_ref()) {
                    Ok(c) => c,
                    Err(code) => return code,
                };
                if let Some(s) = seed {
                    cfg.seed = s;
                }
                if let Some(n) = replicates {
                    cfg.replicates = n;
                }
                if let Some(s) = strategy {
                    cfg.strategy = match s {
                        StrategyArg::Boundary => StrategyChoice::Boundary,
                        StrategyArg::Center => StrategyChoice::Center,
                        StrategyArg::Both => StrategyChoice::Both,
                    };
                }
                let run = match run_replicates(&cfg, jobs) {
                    Ok(r) => r,
                    Err(e @ PipelineError::Config(_)) => return fail(EXIT_INPUT, e),
                    Err(e) => return fail(EXIT_INVARIANT, e),
                };
                if let Err(e) = write_run(&out, &cfg, &run, format) {
                    return fail(EXIT_IO, e);
                }
                finish(&out, &plain_report(&run.summaries))
            }
        }
        Command::Poses { annotations, config } => {
            let cfg = match config_or_default(config.as_ref()) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let set = match load_annotations(&annotations) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_INPUT, format_args!("{}: {e}", annotations.display())),
            };
            if !set.observations.is_empty() && (set.width, set.height) != (cfg.camera.width, cfg.camera.height) {
                return fail(
                    EXIT_INPUT,
                    format_args!(
                        "annotation image is {}x{} but the camera is {}x{}",
                        set.width, set.height, cfg.camera.width, cfg.camera.height
                    ),
                );
            }
            print!("{}", poses_csv(&cfg, &set.observations));
            ExitCode::SUCCESS
        }
        Command::Scene { config, seed } => {
            let cfg = match config_or_default(config.as_ref()) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match generate_scene(&cfg.scene, &cfg.camera, seed.unwrap_or(cfg.seed)) {
                Ok(scene) => {
                    println!("{}", serde_json::to_string_pretty(&scene).expect("scene serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_INPUT, e),
            }
        }
    }
}

fn finish(out: &std::path::Path, report: &str) -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if let Err(e) = write_meta(out, &args) {
        return fail(EXIT_IO, e);
    }
    print!("{report}");
    ExitCode::SUCCESS
}

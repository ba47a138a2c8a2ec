//! Command-line front end for the taskstream scenario engine.
//!
//! Subcommands: `synth` writes a deterministic synthetic dataset manifest,
//! `build` materializes a scenario over a dataset manifest, `inspect`
//! summarizes a scenario manifest, `dump` writes one task's transformed
//! data as a dataset manifest, and `metrics` computes the metric report
//! from a prediction log.
//!
//! Exit codes: 0 success, 1 user/input error, 2 internal invariant
//! violation. Diagnostics on stderr name the engine error variant.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use taskstream::{
    load_manifest, load_prediction_log, logger_from_records, metric_report,
    parse_scenario_manifest, synth_dataset, write_manifest, write_scenario_string, ScenarioConfig,
    Split, SynthSpec,
};

#[derive(Parser)]
#[command(name = "taskstream", version, about = "Reproducible continual-learning task streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a deterministic synthetic dataset manifest.
    Synth {
        #[arg(long)]
        classes: u32,
        #[arg(long = "per-class")]
        per_class: u32,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        #[arg(long, default_value = "train")]
        split: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Materialize a scenario config over a dataset manifest.
    Build {
        /// Dataset manifest path (recorded in the scenario manifest).
        #[arg(long)]
        dataset: PathBuf,
        /// Scenario config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a human-readable summary of a scenario manifest.
    Inspect {
        scenario: PathBuf,
    },
    /// Write one task's transformed data as a dataset manifest.
    Dump {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        task: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the metric report from a prediction log.
    Metrics {
        log: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Synth {
            classes,
            per_class,
            dim,
            seed,
            separation,
            split,
            out,
        } => {
            let split: Split = split.parse().map_err(|e| format!("{e}"))?;
            let spec = SynthSpec {
                nb_classes: classes,
                per_class,
                feature_dim: dim,
                seed,
                class_separation: separation,
            };
            let manifest = synth_dataset(&spec, split).map_err(|e| format!("{e}"))?;
            write_manifest(&manifest, &out).map_err(|e| format!("{e}"))?;
        }
        Command::Build {
            dataset,
            config,
            seed,
            out,
        } => {
            let manifest = load_manifest(&dataset).map_err(|e| format!("{e}"))?;
            let text = std::fs::read_to_string(&config).map_err(|e| format!("IoError: {e}"))?;
            let parsed = ScenarioConfig::parse(&text).map_err(|e| format!("{e}"))?;
            let mut spec = parsed
                .into_spec(manifest.image_shape())
                .map_err(|e| format!("{e}"))?;
            if let Some(seed) = seed {
                spec.seed = seed;
            }
            let scenario =
                taskstream::build_scenario(&manifest, &spec).map_err(|e| format!("{e}"))?;
            let body = write_scenario_string(
                &scenario,
                manifest.image_shape(),
                &dataset.to_string_lossy(),
            );
            std::fs::write(&out, body).map_err(|e| format!("IoError: {e}"))?;
        }
        Command::Inspect { scenario } => {
            let text =
                std::fs::read_to_string(&scenario).map_err(|e| format!("IoError: {e}"))?;
            let parsed = parse_scenario_manifest(&text).map_err(|e| format!("{e}"))?;
            let s = parsed.scenario;
            println!("tasks: {}, classes: {}", s.nb_tasks, s.nb_classes);
            println!("kind: {}", s.kind);
            for (task, new) in s.tasks.iter().zip(&s.new_classes) {
                let classes: Vec<String> = task.classes.iter().map(|c| c.to_string()).collect();
                let new: Vec<String> = new.iter().map(|c| c.to_string()).collect();
                println!(
                    "task {}: size {} classes [{}] new [{}] transform {}",
                    task.task_id,
                    task.indices.len(),
                    classes.join(" "),
                    new.join(" "),
                    task.transform.descriptor()
                );
            }
        }
        Command::Dump {
            scenario,
            task,
            out,
        } => {
            let text =
                std::fs::read_to_string(&scenario).map_err(|e| format!("IoError: {e}"))?;
            let parsed = parse_scenario_manifest(&text).map_err(|e| format!("{e}"))?;
            let dataset = load_manifest(&parsed.dataset_path).map_err(|e| format!("{e}"))?;
            let ts = parsed
                .scenario
                .taskset(&dataset, task)
                .map_err(|e| format!("{e}"))?;
            let name = format!("{}_task{}", dataset.name(), task);
            let manifest = ts.materialize_manifest(&name).map_err(|e| format!("{e}"))?;
            write_manifest(&manifest, &out).map_err(|e| format!("{e}"))?;
        }
        Command::Metrics { log } => {
            let records = load_prediction_log(&log).map_err(|e| format!("{e}"))?;
            let logger = logger_from_records(&records).map_err(|e| format!("{e}"))?;
            print!("{}", metric_report(&logger));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gripsim::harness::{
    collect_training_data, export_report, generate_objects, irregular_schedule, run_grasp_trial, run_master_slave,
    run_perturbation_trial, GraspSpec, HarnessError, OverrideSegment, ScheduleParams, SimConfig, HOLDOUT_EVERY,
};
use gripsim::slip::{build_dataset, class_counts, evaluate, read_dataset, split_by_trial, train, write_dataset, Classifier};

#[derive(Parser)]
#[command(name = "gripsim", version, about = "Planar grasp simulator with tactile slip-driven finger control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct Batch {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 12)]
    objects: usize,
    #[arg(long, default_value_t = 0.01)]
    mass_min: f64,
    #[arg(long, default_value_t = 0.4)]
    mass_max: f64,
    #[arg(long, default_value_t = 2)]
    fingers: usize,
    /// Trials per object.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Write per-trial tick series and logs.
    #[arg(long)]
    detailed: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scripted collection protocol and write the labelled dataset.
    Collect(Common),
    /// Fit a slip predictor on the training split of a collected dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score a model on the held-out split.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Grasp a set of generated objects and hold them.
    Grasp(Batch),
    /// Grasp trials under irregular external pushes.
    Perturb {
        #[command(flatten)]
        batch: Batch,
        #[arg(long, default_value_t = 30.0)]
        duration: f64,
    },
    /// Grasp with scripted per-finger overrides (JSON list of segments).
    MasterSlave {
        #[command(flatten)]
        batch: Batch,
        #[arg(long)]
        script: PathBuf,
    },
    /// Live session over WebSocket.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn load_config(path: Option<&Path>) -> Result<SimConfig, HarnessError> {
    match path {
        Some(p) => SimConfig::load(p),
        None => Ok(SimConfig::default()),
    }
}

fn batch_specs(batch: &Batch) -> Vec<GraspSpec> {
    let objects = generate_objects(batch.objects, batch.mass_min, batch.mass_max);
    let mut specs = Vec::new();
    for rep in 0..batch.repeats {
        for obj in &objects {
            let id = specs.len() as u64;
            let seed = batch.common.seed.wrapping_add(rep as u64 * 1000 + id);
            specs.push(GraspSpec::new(id, obj.clone(), batch.fingers, seed));
        }
    }
    specs
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Collect(c) => {
            let config = load_config(c.config.as_deref())?;
            std::fs::create_dir_all(&c.out)?;
            let data = collect_training_data(&config, c.seed)?;
            let samples = build_dataset(&data.records, config.horizon)?;
            write_dataset(&c.out.join("dataset.jsonl"), &samples)?;
            std::fs::write(c.out.join("trials.json"), serde_json::to_string_pretty(&data.trials)?)?;
            let counts = class_counts(&samples);
            println!(
                "{} trials, {} finger records, {} samples (slip {}, contact {}, no_contact {})",
                data.trials.len(),
                data.records.len(),
                samples.len(),
                counts[0],
                counts[1],
                counts[2]
            );
        }
        Command::Train { data, out, seed, config } => {
            let config = load_config(config.as_deref())?;
            let samples = read_dataset(&data.join("dataset.jsonl"))?;
            let (train_set, _) = split_by_trial(&samples, HOLDOUT_EVERY);
            let mut tc = config.training.clone();
            tc.seed = seed;
            let model = train(&train_set, &tc)?;
            model.save(&out)?;
            println!("trained on {} samples -> {}", train_set.len(), out.display());
        }
        Command::Eval { model, data, config } => {
            let config = load_config(config.as_deref())?;
            let model = Classifier::load(&model)?;
            let samples = read_dataset(&data.join("dataset.jsonl"))?;
            let (_, test) = split_by_trial(&samples, HOLDOUT_EVERY);
            let report = evaluate(&model, &test, config.horizon)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Grasp(b) => {
            let config = load_config(b.common.config.as_deref())?;
            let model = Classifier::load(&b.model)?;
            let mut results = Vec::new();
            for spec in batch_specs(&b) {
                results.push(run_grasp_trial(&config, &model, spec)?);
            }
            let report = export_report(&b.common.out, &results, b.detailed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Perturb { batch: b, duration } => {
            let config = load_config(b.common.config.as_deref())?;
            let model = Classifier::load(&b.model)?;
            let params = ScheduleParams {
                horizon: duration - 2.0,
                ..ScheduleParams::default()
            };
            let mut results = Vec::new();
            for mut spec in batch_specs(&b) {
                spec.duration = Some(duration);
                let schedule = irregular_schedule(&params, b.common.seed, spec.trial_id);
                results.push(run_perturbation_trial(&config, &model, spec, schedule)?);
            }
            let report = export_report(&b.common.out, &results, b.detailed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::MasterSlave { batch: b, script } => {
            let config = load_config(b.common.config.as_deref())?;
            let model = Classifier::load(&b.model)?;
            let script: Vec<OverrideSegment> = serde_json::from_str(&std::fs::read_to_string(script)?)?;
            let mut results = Vec::new();
            for spec in batch_specs(&b) {
                results.push(run_master_slave(&config, &model, spec, script.clone())?);
            }
            let report = export_report(&b.common.out, &results, b.detailed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Serve { model, config, addr, seed } => {
            let config = load_config(config.as_deref())?;
            let model = Classifier::load(&model)?;
            gripsim::serve::serve(&addr, &config, &model, seed)?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use icu_cli::config::{parse_config, parse_frame, ConfigError, DataSource, ExperimentConfig};
use icu_cli::experiment::{load_inputs, run_experiment, StagePrediction};
use icu_cli::report::{emit_report, stage1_model_file, stage2_model_file};
use icu_core::baselines::{saps2_score, sofa_score};
use icu_core::data::{
    generate_synthetic_cohort, write_cohort, write_observations, SyntheticConfig,
};
use icu_core::nn::{load_model, predict, TrainedModel};
use icu_core::preprocess::{interpolated_grids, Frame};
use icu_core::rng::PRNG_ID;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "icu",
    version,
    about = "ICU mortality and length-of-stay experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with a planted deterioration signal.
    Synth {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 0.3)]
        mortality_rate: f64,
        /// Drift by the sixth hour, in channel standard deviations.
        #[arg(long, default_value_t = 3.0)]
        signal: f64,
        #[arg(long, default_value_t = 0.3)]
        missing_rate: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the cross-validated experiment and write the report.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Observation window in hours (6, 12 or 24); repeat for several.
        #[arg(long, value_parser = parse_frame)]
        frame: Vec<Frame>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Partial SAPS-II and SOFA for one stay.
    Score {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        observations: PathBuf,
        #[arg(long)]
        stay: String,
        #[arg(long, value_parser = parse_frame, default_value = "24")]
        frame: Frame,
    },
    /// Two-stage predictions from models saved by `run`.
    Predict {
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long, value_parser = parse_frame)]
        frame: Frame,
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        observations: PathBuf,
        /// Restrict output to these stays.
        #[arg(long)]
        stay: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth {
            n,
            seed,
            mortality_rate,
            signal,
            missing_rate,
            out,
        } => synth(
            SyntheticConfig {
                n_stays: n,
                mortality_rate,
                frame_signal_strength: signal,
                missing_rate,
                seed,
            },
            &out,
        ),
        Command::Run {
            config,
            frame,
            seed,
            out,
        } => run(config.as_deref(), frame, seed, out),
        Command::Score {
            cohort,
            observations,
            stay,
            frame,
        } => score(&cohort, &observations, &stay, frame),
        Command::Predict {
            model_dir,
            frame,
            cohort,
            observations,
            stay,
        } => predict_cmd(&model_dir, frame, &cohort, &observations, &stay),
    }
}

fn synth(cfg: SyntheticConfig, out: &Path) -> Result<()> {
    cfg.validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let (cohort, obs) = generate_synthetic_cohort(&cfg)?;
    fs::create_dir_all(out).with_context(|| format!("create {}", out.display()))?;
    fs::write(out.join("cohort.csv"), write_cohort(&cohort))?;
    fs::write(out.join("observations.csv"), write_observations(&obs))?;
    let provenance = json!({
        "generator": "icu-synthetic v1",
        "prng": PRNG_ID,
        "config": cfg,
        "stays": cohort.len(),
        "deaths": cohort.iter().filter(|e| !e.is_survivor()).count(),
        "observations": obs.len(),
        "files": ["cohort.csv", "observations.csv"],
    });
    fs::write(
        out.join("provenance.json"),
        serde_json::to_string_pretty(&provenance)? + "\n",
    )?;
    println!(
        "wrote {} stays, {} observations to {}",
        cohort.len(),
        obs.len(),
        out.display()
    );
    Ok(())
}

fn run(
    config: Option<&Path>,
    frames: Vec<Frame>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
            parse_config(&text).with_context(|| format!("config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if !frames.is_empty() {
        cfg.frames = frames;
        cfg.frames.sort_by_key(|f| f.hours());
        cfg.frames.dedup();
    }
    if let Some(seed) = seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = out {
        cfg.out_dir = out;
    }
    cfg.validate()?;
    let output = run_experiment(&cfg).map_err(|e| match e {
        icu_cli::ExperimentError::Config(c) => anyhow::Error::new(c),
        other => anyhow::Error::new(other),
    })?;
    let written = emit_report(&output, &cfg.out_dir)
        .with_context(|| format!("write report to {}", cfg.out_dir.display()))?;
    for row in output.frames.iter().flat_map(|f| &f.rows) {
        println!(
            "{:>5} {:>2}h  test F1 {:.3}  MCC {:.3}  AUROC {}",
            row.model.name(),
            row.frame_hours,
            row.test.f1,
            row.test.mcc,
            row.test
                .auroc
                .map_or_else(|| "n/a".into(), |a| format!("{a:.3}"))
        );
    }
    println!("wrote {} files to {}", written.len(), cfg.out_dir.display());
    Ok(())
}

fn read_inputs(cohort: &Path, observations: &Path) -> Result<icu_cli::experiment::Inputs> {
    Ok(load_inputs(&DataSource::Files {
        cohort_path: cohort.to_path_buf(),
        observations_path: observations.to_path_buf(),
    })?)
}

fn score(cohort: &Path, observations: &Path, stay: &str, frame: Frame) -> Result<()> {
    let inputs = read_inputs(cohort, observations)?;
    let entry = inputs
        .cohort
        .iter()
        .find(|e| e.stay_id == stay)
        .ok_or_else(|| anyhow!("stay {stay} not in cohort"))?;
    let grid = interpolated_grids(std::slice::from_ref(entry), &inputs.observations, frame)
        .pop()
        .expect("one grid per entry");
    let saps = saps2_score(&grid, entry.age_years).with_context(|| format!("stay {stay}"))?;
    let sofa = sofa_score(&grid).with_context(|| format!("stay {stay}"))?;
    let out = json!({
        "stay_id": stay,
        "frame_hours": frame.hours(),
        "saps2": saps,
        "sofa": sofa,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn load_model_file(path: &Path) -> Result<TrainedModel> {
    let text = fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
    load_model(&text).with_context(|| format!("load {}", path.display()))
}

fn predict_cmd(
    model_dir: &Path,
    frame: Frame,
    cohort: &Path,
    observations: &Path,
    stays: &[String],
) -> Result<()> {
    let stage1 = load_model_file(&model_dir.join(stage1_model_file(frame.hours())))?;
    let stage2 = load_model_file(&model_dir.join(stage2_model_file(frame.hours())))?;
    let inputs = read_inputs(cohort, observations)?;
    let selected: Vec<_> = inputs
        .cohort
        .iter()
        .filter(|e| stays.is_empty() || stays.contains(&e.stay_id))
        .cloned()
        .collect();
    if let Some(missing) = stays
        .iter()
        .find(|s| !selected.iter().any(|e| &e.stay_id == *s))
    {
        return Err(anyhow!("stay {missing} not in cohort"));
    }
    let mut out = Vec::with_capacity(selected.len());
    for grid in interpolated_grids(&selected, &inputs.observations, frame) {
        let id = grid.stay_id.clone();
        let p1 = predict(&stage1, &stage1.prepare(&grid)).with_context(|| format!("stay {id}"))?;
        let sp = StagePrediction::gated(&id, &p1, || predict(&stage2, &stage2.prepare(&grid)))
            .with_context(|| format!("stay {id}"))?;
        out.push(sp);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

//! The two-stage experiment: exclusions, per-frame windows, a held-out test
//! split, K-fold cross-validation on the remainder, a refit on the whole
//! remainder and evaluation on the untouched test stays.

use std::fmt::Display;
use std::fs;

use icu_core::baselines::{
    lr_fit, lr_predict, nb_fit, nb_predict, saps2_score, score_to_classifier, sofa_score,
    BaselineError, LrModel, NbModel,
};
use icu_core::data::{generate_synthetic_cohort, parse_cohort, parse_observations};
use icu_core::metrics::{
    auroc_multiclass, confusion_matrix, f1_binary, kfold_split, mcc_binary, roc_curve,
    MetricsError, MulticlassAuroc, RocCurve,
};
use icu_core::nn::{predict, train, ModelConfig, Prediction, Task, TrainedModel};
use icu_core::preprocess::{
    apply_exclusions, compute_channel_stats, finalize_grid, interpolated_grids, undersample,
    ChannelStats, Frame, LabeledWindow, LOS_CLASSES,
};
use icu_core::{rng, ChannelGrid, CohortEntry, RawObservation};
use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, DataSource, ExperimentConfig, ModelKind};

const LR_STEP: f64 = 0.1;
const LR_ITERATIONS: usize = 2000;

// Tags for streams derived from the experiment seed.
const SPLIT_TAG: u64 = 1;
const FOLD_TAG: u64 = 2;
const BALANCE_TAG: u64 = 3;
const STAGE2_TAG: u64 = 4;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{stage}{}: {message}", stay_id.as_ref().map(|s| format!(" (stay {s})")).unwrap_or_default())]
    Stage {
        stage: String,
        stay_id: Option<String>,
        message: String,
    },
}

fn at<E: Display>(stage: &str, stay_id: Option<&str>) -> impl FnOnce(E) -> ExperimentError {
    let stage = stage.to_string();
    let stay_id = stay_id.map(str::to_string);
    move |e| ExperimentError::Stage {
        stage,
        stay_id,
        message: e.to_string(),
    }
}

/// Stage-1 decision with the stage-2 class attached only for predicted deaths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePrediction {
    pub stay_id: String,
    pub mortality_probability: f64,
    pub mortality_decision: u8,
    pub los_class: Option<u8>,
}

impl StagePrediction {
    /// Consults `stage2` only when stage 1 predicts death.
    pub fn gated<E>(
        stay_id: &str,
        stage1: &Prediction,
        stage2: impl FnOnce() -> Result<Prediction, E>,
    ) -> Result<Self, E> {
        let decision = stage1.decision() as u8;
        let los_class = if decision == 1 {
            Some(stage2()?.decision() as u8)
        } else {
            None
        };
        Ok(Self {
            stay_id: stay_id.to_string(),
            mortality_probability: stage1.probs[0],
            mortality_decision: decision,
            los_class,
        })
    }
}

/// A test-set prediction next to the stay's true labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub prediction: StagePrediction,
    pub true_mortality: u8,
    pub true_los_class: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub f1: f64,
    pub mcc: f64,
    pub auroc: Option<f64>,
    pub f1_degenerate: bool,
    pub mcc_degenerate: bool,
    pub auroc_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LosMetrics {
    pub n: usize,
    pub accuracy: f64,
    pub micro_auroc: Option<f64>,
    pub macro_auroc: Option<f64>,
    pub per_class_auroc: Vec<Option<f64>>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelRow {
    pub model: ModelKind,
    pub frame_hours: u32,
    /// Learned models are comparable at every frame; the acuity scores only
    /// at 24 h, the window they are defined on.
    pub comparable: bool,
    pub folds: Vec<BinaryMetrics>,
    pub fold_mean_f1: f64,
    pub fold_mean_mcc: f64,
    pub fold_mean_auroc: Option<f64>,
    pub test: BinaryMetrics,
    /// Decision cut for score-based models, fit on the refit training set.
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LosRow {
    pub frame_hours: u32,
    pub folds: Vec<LosMetrics>,
    pub test: LosMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSummary {
    pub n_raw: usize,
    pub n_after_exclusions: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub test_deaths: usize,
}

/// Stay-level split. Indices point into the post-exclusion cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub test: Vec<usize>,
    pub train: Vec<usize>,
    /// Validation folds partitioning `train`.
    pub folds: Vec<Vec<usize>>,
}

impl Split {
    /// Training stays for fold `k`: every other fold.
    pub fn fold_train(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .flat_map(|(_, f)| f.iter().copied())
            .collect();
        idx.sort_unstable();
        idx
    }
}

pub fn split_cohort(
    n: usize,
    test_fraction: f64,
    folds: usize,
    seed: u64,
) -> Result<Split, MetricsError> {
    let n_test = ((n as f64 * test_fraction).round() as usize).max(1);
    if n < n_test + folds {
        return Err(MetricsError::TooFewSamples {
            n,
            k: n_test + folds,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(rng::derive(seed, SPLIT_TAG)));
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    let folds = kfold_split(train.len(), folds, rng::derive(seed, FOLD_TAG))?
        .into_iter()
        .map(|f| {
            let mut idx: Vec<usize> = f.into_iter().map(|i| train[i]).collect();
            idx.sort_unstable();
            idx
        })
        .collect();
    Ok(Split { test, train, folds })
}

/// Trained predictors for one training set. Each is present iff requested.
#[derive(Debug, Clone)]
pub struct FittedModels {
    pub stats: ChannelStats,
    pub balance: TrainingBalance,
    pub stage1: Option<TrainedModel>,
    pub stage2: Option<TrainedModel>,
    pub nb: Option<NbModel>,
    pub lr: Option<LrModel>,
    pub saps2_threshold: Option<f64>,
    pub sofa_threshold: Option<f64>,
}

/// Class counts of the undersampled training sets behind one fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainingBalance {
    pub frame_hours: u32,
    /// Validation fold index, or `None` for the refit on all training stays.
    pub fold: Option<usize>,
    /// Survivors, deaths.
    pub mortality: Vec<usize>,
    /// Per LOS class, when the stage-2 model was trained.
    pub los: Option<Vec<usize>>,
}

fn class_counts(labels: impl Iterator<Item = usize>, n: usize) -> Vec<usize> {
    let mut counts = vec![0; n];
    for l in labels {
        counts[l] += 1;
    }
    counts
}

/// Everything one frame contributes to the report.
#[derive(Debug, Clone)]
pub struct FrameOutcome {
    pub frame: Frame,
    pub rows: Vec<ModelRow>,
    pub los: Option<LosRow>,
    pub predictions: Vec<PredictionRecord>,
    pub test_curves: Vec<(ModelKind, Option<RocCurve>)>,
    pub multiclass: Option<MulticlassAuroc>,
    pub balance: Vec<TrainingBalance>,
    pub refit: FittedModels,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub cohort: Vec<CohortEntry>,
    pub summary: CohortSummary,
    pub split: Split,
    pub frames: Vec<FrameOutcome>,
}

pub struct Inputs {
    pub cohort: Vec<CohortEntry>,
    pub observations: Vec<RawObservation>,
}

pub fn load_inputs(source: &DataSource) -> Result<Inputs, ExperimentError> {
    match source {
        DataSource::Files {
            cohort_path,
            observations_path,
        } => {
            let read = |p: &std::path::Path| {
                fs::read_to_string(p).map_err(|e| ExperimentError::Stage {
                    stage: format!("read {}", p.display()),
                    stay_id: None,
                    message: e.to_string(),
                })
            };
            let cohort = parse_cohort(&read(cohort_path)?)
                .map_err(at(&format!("parse {}", cohort_path.display()), None))?;
            let observations = parse_observations(&read(observations_path)?)
                .map_err(at(&format!("parse {}", observations_path.display()), None))?;
            Ok(Inputs {
                cohort,
                observations,
            })
        }
        DataSource::Synthetic(s) => {
            let (cohort, observations) =
                generate_synthetic_cohort(s).map_err(at("synthetic data", None))?;
            Ok(Inputs {
                cohort,
                observations,
            })
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()?;
    if cfg.model.folds < 2 {
        return Err(ConfigError::Invalid("cross-validation needs folds >= 2".into()).into());
    }
    let inputs = load_inputs(&cfg.source)?;
    run_on(cfg, &inputs)
}

pub fn run_on(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
) -> Result<ExperimentOutput, ExperimentError> {
    let cohort = apply_exclusions(&inputs.cohort);
    let split = split_cohort(cohort.len(), cfg.test_fraction, cfg.model.folds, cfg.seed)
        .map_err(at("split", None))?;
    let summary = CohortSummary {
        n_raw: inputs.cohort.len(),
        n_after_exclusions: cohort.len(),
        n_train: split.train.len(),
        n_test: split.test.len(),
        test_deaths: split
            .test
            .iter()
            .filter(|&&i| !cohort[i].is_survivor())
            .count(),
    };
    let frames = cfg
        .frames
        .iter()
        .map(|&frame| run_frame(cfg, &cohort, &inputs.observations, &split, frame))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentOutput {
        config: cfg.clone(),
        cohort,
        summary,
        split,
        frames,
    })
}

fn run_frame(
    cfg: &ExperimentConfig,
    cohort: &[CohortEntry],
    obs: &[RawObservation],
    split: &Split,
    frame: Frame,
) -> Result<FrameOutcome, ExperimentError> {
    let grids = interpolated_grids(cohort, obs, frame);
    let data = FrameData {
        cohort,
        grids: &grids,
        frame,
    };

    let mut fold_evals = Vec::with_capacity(split.folds.len());
    let mut balance = Vec::with_capacity(split.folds.len() + 1);
    for (k, validation) in split.folds.iter().enumerate() {
        let fold_seed = cfg.seed ^ k as u64;
        let fitted = fit(cfg, &data, &split.fold_train(k), Some(k), fold_seed)
            .map_err(|e| e.within(&format!("frame {frame} fold {k}")))?;
        fold_evals.push(evaluate(cfg, &data, &fitted, validation)?);
        balance.push(fitted.balance);
    }

    let refit_seed = cfg.seed ^ split.folds.len() as u64;
    let refit = fit(cfg, &data, &split.train, None, refit_seed)
        .map_err(|e| e.within(&format!("frame {frame} refit")))?;
    let test = evaluate(cfg, &data, &refit, &split.test)?;
    balance.push(refit.balance.clone());

    let rows = cfg
        .models
        .iter()
        .map(|&model| {
            let folds: Vec<BinaryMetrics> = fold_evals
                .iter()
                .map(|e| e.binary_for(model).0.clone())
                .collect();
            let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
            let aurocs: Vec<f64> = folds.iter().filter_map(|m| m.auroc).collect();
            ModelRow {
                model,
                frame_hours: frame.hours() as u32,
                comparable: !matches!(model, ModelKind::Saps2 | ModelKind::Sofa)
                    || frame == Frame::H24,
                fold_mean_f1: mean(folds.iter().map(|m| m.f1).collect()),
                fold_mean_mcc: mean(folds.iter().map(|m| m.mcc).collect()),
                fold_mean_auroc: (!aurocs.is_empty()).then(|| mean(aurocs)),
                folds,
                test: test.binary_for(model).0.clone(),
                threshold: match model {
                    ModelKind::Saps2 => refit.saps2_threshold,
                    ModelKind::Sofa => refit.sofa_threshold,
                    _ => None,
                },
            }
        })
        .collect();

    let los = test.los.as_ref().map(|(m, _)| LosRow {
        frame_hours: frame.hours() as u32,
        folds: fold_evals
            .iter()
            .filter_map(|e| e.los.as_ref().map(|l| l.0.clone()))
            .collect(),
        test: m.clone(),
    });
    let test_curves = cfg
        .models
        .iter()
        .map(|&m| (m, test.binary_for(m).1.clone()))
        .collect();
    Ok(FrameOutcome {
        frame,
        rows,
        los,
        predictions: test.predictions,
        test_curves,
        multiclass: test.los.and_then(|l| l.1),
        balance,
        refit,
    })
}

struct FrameData<'a> {
    cohort: &'a [CohortEntry],
    /// Interpolated raw-unit grids, aligned with `cohort`.
    grids: &'a [ChannelGrid],
    frame: Frame,
}

impl ExperimentError {
    fn within(self, context: &str) -> Self {
        match self {
            Self::Stage {
                stage,
                stay_id,
                message,
            } => Self::Stage {
                stage: format!("{context}: {stage}"),
                stay_id,
                message,
            },
            other => other,
        }
    }
}

type ScoreFn = fn(&ChannelGrid, &CohortEntry) -> Result<u32, BaselineError>;

fn stay_scores(
    data: &FrameData,
    idx: &[usize],
    score: ScoreFn,
    stage: &str,
) -> Result<Vec<f64>, ExperimentError> {
    idx.iter()
        .map(|&i| {
            score(&data.grids[i], &data.cohort[i])
                .map(f64::from)
                .map_err(at(stage, Some(&data.cohort[i].stay_id)))
        })
        .collect()
}

fn saps2_total(g: &ChannelGrid, e: &CohortEntry) -> Result<u32, BaselineError> {
    saps2_score(g, e.age_years).map(|s| s.total)
}

fn sofa_total(g: &ChannelGrid, _: &CohortEntry) -> Result<u32, BaselineError> {
    sofa_score(g).map(|s| s.total)
}

/// Trains every requested model on the stays `idx`.
fn fit(
    cfg: &ExperimentConfig,
    data: &FrameData,
    idx: &[usize],
    fold: Option<usize>,
    seed: u64,
) -> Result<FittedModels, ExperimentError> {
    let train_grids: Vec<ChannelGrid> = idx.iter().map(|&i| data.grids[i].clone()).collect();
    let stats = compute_channel_stats(&train_grids).map_err(at("channel statistics", None))?;
    let windows: Vec<LabeledWindow> = idx
        .iter()
        .map(|&i| LabeledWindow::new(finalize_grid(&data.grids[i], &stats), &data.cohort[i]))
        .collect();
    let balanced = undersample(
        &windows,
        |w| usize::from(w.mortality_label),
        rng::derive(seed, BALANCE_TAG),
    )
    .map_err(at("undersample", None))?;
    let wants = |m| cfg.models.contains(&m);
    let model_cfg = |s| ModelConfig {
        seed: s,
        ..cfg.model.clone()
    };

    let mut balance = TrainingBalance {
        frame_hours: data.frame.hours() as u32,
        fold,
        mortality: class_counts(balanced.iter().map(|w| usize::from(w.mortality_label)), 2),
        los: None,
    };
    let (mut stage1, mut stage2) = (None, None);
    if wants(ModelKind::Lstm) {
        stage1 = Some(
            train(&balanced, Task::Binary, &model_cfg(seed), &stats)
                .map_err(at("stage-1 training", None))?,
        );
        let deaths: Vec<LabeledWindow> = windows
            .iter()
            .filter(|w| w.mortality_label == 1 && w.los_class.is_some())
            .cloned()
            .collect();
        let deaths = undersample(
            &deaths,
            |w| usize::from(w.los_class.unwrap_or(0)),
            rng::derive(seed, STAGE2_TAG),
        )
        .map_err(at("stage-2 undersample", None))?;
        balance.los = Some(class_counts(
            deaths.iter().filter_map(|w| w.los_class).map(usize::from),
            LOS_CLASSES,
        ));
        stage2 = Some(
            train(
                &deaths,
                Task::Multiclass,
                &model_cfg(rng::derive(seed, STAGE2_TAG)),
                &stats,
            )
            .map_err(at("stage-2 training", None))?,
        );
    }

    let features: Vec<Vec<f64>> = balanced.iter().map(|w| w.grid.flatten()).collect();
    let nb = if wants(ModelKind::Nb) {
        let labels: Vec<usize> = balanced
            .iter()
            .map(|w| usize::from(w.mortality_label))
            .collect();
        Some(nb_fit(&features, &labels).map_err(at("naive Bayes fit", None))?)
    } else {
        None
    };
    let lr = if wants(ModelKind::Lr) {
        let labels: Vec<u8> = balanced.iter().map(|w| w.mortality_label).collect();
        Some(
            lr_fit(&features, &labels, LR_STEP, LR_ITERATIONS)
                .map_err(at("logistic regression fit", None))?,
        )
    } else {
        None
    };

    let labels: Vec<u8> = windows.iter().map(|w| w.mortality_label).collect();
    let threshold = |kind, score: ScoreFn| -> Result<Option<f64>, ExperimentError> {
        if !wants(kind) {
            return Ok(None);
        }
        let scores = stay_scores(data, idx, score, &format!("{kind} score"))?;
        Ok(Some(score_to_classifier(&scores, &labels).threshold))
    };
    let saps2_threshold = threshold(ModelKind::Saps2, saps2_total)?;
    let sofa_threshold = threshold(ModelKind::Sofa, sofa_total)?;

    Ok(FittedModels {
        stats,
        balance,
        stage1,
        stage2,
        nb,
        lr,
        saps2_threshold,
        sofa_threshold,
    })
}

struct Evaluation {
    binary: Vec<(ModelKind, BinaryMetrics, Option<RocCurve>)>,
    los: Option<(LosMetrics, Option<MulticlassAuroc>)>,
    predictions: Vec<PredictionRecord>,
}

impl Evaluation {
    fn binary_for(&self, model: ModelKind) -> (&BinaryMetrics, &Option<RocCurve>) {
        let (_, m, c) = self
            .binary
            .iter()
            .find(|(k, _, _)| *k == model)
            .expect("every requested model is evaluated");
        (m, c)
    }
}

fn binary_metrics(
    scores: &[f64],
    decisions: &[u8],
    truth: &[u8],
) -> (BinaryMetrics, Option<RocCurve>) {
    let t: Vec<usize> = truth.iter().map(|&v| usize::from(v)).collect();
    let p: Vec<usize> = decisions.iter().map(|&v| usize::from(v)).collect();
    let cm = confusion_matrix(&t, &p, 2).expect("binary labels");
    let (f1, mcc) = (f1_binary(&cm), mcc_binary(&cm));
    let positives: Vec<bool> = truth.iter().map(|&v| v == 1).collect();
    let curve = roc_curve(scores, &positives).ok();
    (
        BinaryMetrics {
            f1: f1.value,
            mcc: mcc.value,
            auroc: curve.as_ref().map(|c| c.auc),
            f1_degenerate: f1.degenerate,
            mcc_degenerate: mcc.degenerate,
            auroc_degenerate: curve.is_none(),
        },
        curve,
    )
}

fn evaluate(
    cfg: &ExperimentConfig,
    data: &FrameData,
    fitted: &FittedModels,
    idx: &[usize],
) -> Result<Evaluation, ExperimentError> {
    let truth: Vec<u8> = idx
        .iter()
        .map(|&i| u8::from(!data.cohort[i].is_survivor()))
        .collect();
    let prepared: Vec<ChannelGrid> = idx
        .iter()
        .map(|&i| finalize_grid(&data.grids[i], &fitted.stats))
        .collect();
    let stay = |k: usize| data.cohort[idx[k]].stay_id.as_str();

    let mut binary = Vec::with_capacity(cfg.models.len());
    let mut los = None;
    let mut predictions = Vec::new();
    for &model in &cfg.models {
        let (scores, decisions): (Vec<f64>, Vec<u8>) = match model {
            ModelKind::Lstm => {
                let (stage1, stage2) = match (&fitted.stage1, &fitted.stage2) {
                    (Some(a), Some(b)) => (a, b),
                    _ => unreachable!("lstm requested but not trained"),
                };
                let mut out = Vec::with_capacity(idx.len());
                for (k, g) in prepared.iter().enumerate() {
                    let p1 = predict(stage1, g).map_err(at("stage-1 predict", Some(stay(k))))?;
                    let sp = StagePrediction::gated(stay(k), &p1, || predict(stage2, g))
                        .map_err(at("stage-2 predict", Some(stay(k))))?;
                    out.push((sp.mortality_probability, sp.mortality_decision));
                    let entry = &data.cohort[idx[k]];
                    predictions.push(PredictionRecord {
                        prediction: sp,
                        true_mortality: truth[k],
                        true_los_class: icu_core::preprocess::label_los(entry).ok(),
                    });
                }
                los = Some(evaluate_los(data, stage2, &prepared, idx)?);
                out.into_iter().unzip()
            }
            ModelKind::Nb => {
                let nb = fitted.nb.as_ref().expect("nb trained");
                prepared
                    .iter()
                    .map(|g| {
                        let p = nb_predict(nb, &g.flatten())[1];
                        (p, u8::from(p >= 0.5))
                    })
                    .unzip()
            }
            ModelKind::Lr => {
                let lr = fitted.lr.as_ref().expect("lr trained");
                prepared
                    .iter()
                    .map(|g| {
                        let p = lr_predict(lr, &g.flatten());
                        (p, u8::from(p >= 0.5))
                    })
                    .unzip()
            }
            ModelKind::Saps2 | ModelKind::Sofa => {
                let (score, threshold): (ScoreFn, _) = if model == ModelKind::Saps2 {
                    (saps2_total, fitted.saps2_threshold)
                } else {
                    (sofa_total, fitted.sofa_threshold)
                };
                let threshold = threshold.expect("threshold fit");
                let scores = stay_scores(data, idx, score, &format!("{model} score"))?;
                let decisions = scores.iter().map(|&s| u8::from(s >= threshold)).collect();
                (scores, decisions)
            }
        };
        let (metrics, curve) = binary_metrics(&scores, &decisions, &truth);
        binary.push((model, metrics, curve));
    }
    Ok(Evaluation {
        binary,
        los,
        predictions,
    })
}

/// Stage 2 on the true deaths with a positive death time, ungated.
fn evaluate_los(
    data: &FrameData,
    stage2: &TrainedModel,
    prepared: &[ChannelGrid],
    idx: &[usize],
) -> Result<(LosMetrics, Option<MulticlassAuroc>), ExperimentError> {
    let mut probs = Vec::new();
    let mut labels = Vec::new();
    for (k, &i) in idx.iter().enumerate() {
        let entry = &data.cohort[i];
        if entry.is_survivor() {
            continue;
        }
        let Ok(class) = icu_core::preprocess::label_los(entry) else {
            continue;
        };
        let p =
            predict(stage2, &prepared[k]).map_err(at("stage-2 predict", Some(&entry.stay_id)))?;
        probs.push(p.probs);
        labels.push(usize::from(class));
    }
    let correct = probs
        .iter()
        .zip(&labels)
        .filter(|(p, &l)| Prediction { probs: p.to_vec() }.decision() == l)
        .count();
    let multi = if probs.is_empty() {
        None
    } else {
        match auroc_multiclass(&probs, &labels) {
            Ok(m) => Some(m),
            Err(MetricsError::SingleClass) => None,
            Err(e) => return Err(at("stage-2 metrics", None)(e)),
        }
    };
    let metrics = LosMetrics {
        n: labels.len(),
        accuracy: if labels.is_empty() {
            0.0
        } else {
            correct as f64 / labels.len() as f64
        },
        micro_auroc: multi.as_ref().map(|m| m.micro_auc),
        macro_auroc: multi.as_ref().and_then(|m| m.macro_auc),
        per_class_auroc: multi
            .as_ref()
            .map_or_else(|| vec![None; LOS_CLASSES], |m| m.per_class.clone()),
        degenerate: multi.as_ref().is_none_or(|m| m.degenerate),
    };
    debug_assert_eq!(data.frame, stage2.frame);
    Ok((metrics, multi))
}

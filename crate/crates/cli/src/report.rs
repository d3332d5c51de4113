//! Structured report and on-disk artifacts for one experiment.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use icu_core::metrics::RocCurve;
use icu_core::nn::save_model;
use icu_core::rng::PRNG_ID;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::{
    CohortSummary, ExperimentOutput, LosRow, ModelRow, PredictionRecord, TrainingBalance,
};
use crate::svg::render_multiclass_roc;

pub const REPORT_FORMAT: &str = "icu-report v1";

pub const BASELINE_INPUTS: &str = "all models see the same interpolated, imputed and normalized windows; \
naive Bayes and logistic regression use them flattened to T x 11 features; SAPS-II and SOFA score the \
interpolated raw-unit windows";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GatingSummary {
    pub frame_hours: u32,
    pub predicted_deaths: usize,
    pub predicted_deaths_with_los: usize,
    pub predicted_survivors: usize,
    pub predicted_survivors_with_los: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub format: &'static str,
    pub prng: &'static str,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub baseline_inputs: &'static str,
    pub cohort: CohortSummary,
    pub rows: Vec<ModelRow>,
    pub los: Vec<LosRow>,
    pub gating: Vec<GatingSummary>,
    pub training_balance: Vec<TrainingBalance>,
}

pub fn build_report(out: &ExperimentOutput) -> MetricsReport {
    MetricsReport {
        format: REPORT_FORMAT,
        prng: PRNG_ID,
        seed: out.config.seed,
        config: out.config.clone(),
        baseline_inputs: BASELINE_INPUTS,
        cohort: out.summary.clone(),
        rows: out
            .frames
            .iter()
            .flat_map(|f| f.rows.iter().cloned())
            .collect(),
        los: out.frames.iter().filter_map(|f| f.los.clone()).collect(),
        gating: out
            .frames
            .iter()
            .filter(|f| !f.predictions.is_empty())
            .map(|f| {
                let p = || f.predictions.iter().map(|r| &r.prediction);
                let deaths = p().filter(|s| s.mortality_decision == 1).count();
                GatingSummary {
                    frame_hours: f.frame.hours() as u32,
                    predicted_deaths: deaths,
                    predicted_deaths_with_los: p()
                        .filter(|s| s.mortality_decision == 1 && s.los_class.is_some())
                        .count(),
                    predicted_survivors: f.predictions.len() - deaths,
                    predicted_survivors_with_los: p()
                        .filter(|s| s.mortality_decision == 0 && s.los_class.is_some())
                        .count(),
                }
            })
            .collect(),
        training_balance: out
            .frames
            .iter()
            .flat_map(|f| f.balance.iter().cloned())
            .collect(),
    }
}

pub fn roc_csv(curve: Option<&RocCurve>) -> String {
    let mut s = String::from("fpr,tpr\n");
    for (fpr, tpr) in curve.map(|c| c.points.as_slice()).unwrap_or_default() {
        let _ = writeln!(s, "{fpr},{tpr}");
    }
    s
}

pub fn predictions_csv(records: &[PredictionRecord]) -> String {
    let opt = |v: Option<u8>| v.map(|c| c.to_string()).unwrap_or_default();
    let mut s = String::from(
        "stay_id,mortality_probability,mortality_decision,los_class,true_mortality,true_los_class\n",
    );
    for r in records {
        let p = &r.prediction;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            p.stay_id,
            p.mortality_probability,
            p.mortality_decision,
            opt(p.los_class),
            r.true_mortality,
            opt(r.true_los_class)
        );
    }
    s
}

/// One row per stay: the test partition, or the validation fold it belongs
/// to (it trains in every other fold and in the refit).
pub fn folds_manifest_csv(out: &ExperimentOutput) -> String {
    let mut rows: Vec<(usize, String)> = out
        .split
        .test
        .iter()
        .map(|&i| (i, "test,".to_string()))
        .collect();
    for (k, fold) in out.split.folds.iter().enumerate() {
        rows.extend(fold.iter().map(|&i| (i, format!("cv,{k}"))));
    }
    rows.sort_by_key(|r| r.0);
    let mut s = String::from("stay_id,partition,fold\n");
    for (i, part) in rows {
        let _ = writeln!(s, "{},{part}", out.cohort[i].stay_id);
    }
    s
}

pub fn stage1_model_file(frame_hours: usize) -> String {
    format!("model_stage1_{frame_hours}.txt")
}

pub fn stage2_model_file(frame_hours: usize) -> String {
    format!("model_stage2_{frame_hours}.txt")
}

/// Writes every artifact into `dir` and returns the paths in write order.
pub fn emit_report(out: &ExperimentOutput, dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> io::Result<()> {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };

    let report = build_report(out);
    let json = serde_json::to_string_pretty(&report).map_err(io::Error::other)?;
    put("report.json".into(), json + "\n")?;
    put("folds_manifest.csv".into(), folds_manifest_csv(out))?;
    for f in &out.frames {
        let h = f.frame.hours();
        for (model, curve) in &f.test_curves {
            put(format!("roc_{model}_{h}.csv"), roc_csv(curve.as_ref()))?;
        }
        if let Some(m) = &f.multiclass {
            let title = format!("Length-of-stay ROC, {h} h window");
            put(
                format!("roc_multiclass_{h}.svg"),
                render_multiclass_roc(&title, m),
            )?;
        }
        if !f.predictions.is_empty() {
            put(
                format!("predictions_{h}.csv"),
                predictions_csv(&f.predictions),
            )?;
        }
        if let (Some(s1), Some(s2)) = (&f.refit.stage1, &f.refit.stage2) {
            put(stage1_model_file(h), save_model(s1))?;
            put(stage2_model_file(h), save_model(s2))?;
        }
    }
    Ok(written)
}

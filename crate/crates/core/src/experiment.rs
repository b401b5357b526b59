//! Per-participant experiment pipeline and cohort reports.
//!
//! Each participant runs extract, fuse, label, split, scale, train and
//! evaluate on their own data only. Participants are independent and run on
//! the current rayon pool; results keep cohort order.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::badge::{extract_badge, BadgeConfig};
use crate::data::{label_by_segments, synchronize, Label, LabeledDataset, Modality, TaskSegment, TimeSeries};
use crate::dsp::{extract_physio, PhysioConfig};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate_cohort, cohort_frequencies, evaluate, mean_confusion_percentages, prediction_trace, rank_features,
    CohortMetrics, ConfusionMatrix, ConfusionPercentages, FeatureFrequency, Metrics, PredictionTrace,
};
use crate::learning::grid::{default_c_grid, default_gamma_grid, grid_search_cv_with};
use crate::learning::split::stratified_split_indices;
use crate::learning::{
    scale_to_unit_range, train_adaboost, train_linear_svm, Classifier, ClassifierKind, ModelFile, Samples,
    SplitSpec,
};
use crate::learning::svm::{train_smo, SmoParams, WorkingSet};
use crate::synth::{generate_session, GeneratorConfig, Manifest, RawSession};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub modality: Modality,
    pub classifier: ClassifierKind,
    /// AdaBoost rounds.
    pub rounds: usize,
    /// Linear SVM box constraint.
    pub linear_c: f64,
    pub c_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub folds: usize,
    /// Rows drawn (stratified) from the training part for the RBF grid search.
    pub cv_max_rows: usize,
    /// Rows drawn (stratified) from the training part for the final RBF fit.
    pub rbf_max_rows: usize,
    pub split: SplitSpec,
    /// Length of each participant's feature ranking.
    pub top_k: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            modality: Modality::Combined,
            classifier: ClassifierKind::Adaboost,
            rounds: 300,
            linear_c: 10.0,
            c_grid: default_c_grid(),
            gamma_grid: default_gamma_grid(),
            folds: 5,
            cv_max_rows: 500,
            rbf_max_rows: 3000,
            split: SplitSpec::default(),
            top_k: 5,
        }
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "modality" => self.modality = value.parse()?,
            "classifier" => self.classifier = value.trim().parse()?,
            "T" | "rounds" => self.rounds = parse_num(key, value)?,
            "C" | "linear_c" => self.linear_c = parse_num(key, value)?,
            "c_grid" => self.c_grid = parse_list(key, value)?,
            "gamma_grid" => self.gamma_grid = parse_list(key, value)?,
            "folds" => self.folds = parse_num(key, value)?,
            "cv_max_rows" => self.cv_max_rows = parse_num(key, value)?,
            "rbf_max_rows" => self.rbf_max_rows = parse_num(key, value)?,
            "train_fraction" => self.split.train_fraction = parse_num(key, value)?,
            "seed" | "split_seed" => self.split.seed = parse_num(key, value)?,
            "top_k" => self.top_k = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown experiment setting {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("T must be at least 1".into()));
        }
        if !(self.linear_c > 0.0) {
            return Err(Error::Config(format!("C must be positive, got {}", self.linear_c)));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.c_grid.is_empty() || self.gamma_grid.is_empty() {
            return Err(Error::Config("RBF grids must be non-empty".into()));
        }
        if self.cv_max_rows < 2 * self.folds {
            return Err(Error::Config("cv_max_rows is too small for the fold count".into()));
        }
        if self.rbf_max_rows < 2 {
            return Err(Error::Config("rbf_max_rows must be at least 2".into()));
        }
        Ok(())
    }
}

/// Splits `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                return None;
            }
            Some(match line.split_once('=') {
                Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
                None => Err(Error::Config(format!("line {}: expected key = value, got {line:?}", i + 1))),
            })
        })
        .collect()
}

/// Feature extraction settings for both sensors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExtractionConfig {
    pub physio: PhysioConfig,
    pub badge: BadgeConfig,
}

/// Feature channels of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionFeatures {
    pub participant_id: String,
    pub segments: Vec<TaskSegment>,
    pub phys: Vec<TimeSeries>,
    pub badge: Vec<TimeSeries>,
}

impl SessionFeatures {
    pub fn fuse(&self) -> Result<LabeledDataset> {
        let vectors = synchronize(&self.phys, &self.badge, self.target_rate())?;
        label_by_segments(self.participant_id.clone(), &vectors, &self.segments)
    }

    fn target_rate(&self) -> f64 {
        self.phys.first().map_or(10.0, |c| c.rate)
    }
}

pub fn extract_session(raw: &RawSession, config: &ExtractionConfig) -> Result<SessionFeatures> {
    let phys = extract_physio(&raw.eda, &raw.ppg, &config.physio)?;
    let badge = extract_badge(&raw.accel, &raw.front, &raw.back, &config.badge)?;
    Ok(SessionFeatures {
        participant_id: raw.participant_id.clone(),
        segments: raw.segments.clone(),
        phys,
        badge,
    })
}

/// Generates every planned session and reduces it to features, one
/// participant per worker so raw streams never pile up in memory.
pub fn synthesize_features(gen: &GeneratorConfig, manifest: &Manifest, config: &ExtractionConfig) -> Result<Vec<SessionFeatures>> {
    manifest
        .participants
        .par_iter()
        .map(|plan| extract_session(&generate_session(gen, plan)?, config))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    /// Stumps admitted (AdaBoost).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stumps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub support_vectors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cv_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantResult {
    pub participant_id: String,
    pub n_train: usize,
    pub n_test: usize,
    pub stress_rows: usize,
    pub neutral_rows: usize,
    pub train_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub percentages: ConfusionPercentages,
    /// Features of the first `top_k` stumps (AdaBoost only).
    pub ranking: Vec<String>,
    pub model: ModelSummary,
    /// Session-wide time predicted as stress during neutral tasks.
    pub false_alarm_s: f64,
    pub wrong_runs: usize,
}

pub struct ParticipantOutcome {
    pub result: ParticipantResult,
    pub model: ModelFile,
    pub trace: PredictionTrace,
}

fn predict_all(classifier: &Classifier, rows: &[Vec<f64>]) -> Result<Vec<Label>> {
    rows.iter().map(|x| classifier.predict(x).map(|(l, _)| l)).collect()
}

impl ModelSummary {
    pub fn of(classifier: &Classifier) -> Self {
        let mut summary = ModelSummary {
            stumps: None,
            training_error_bound: None,
            support_vectors: None,
            c: None,
            gamma: None,
            cv_accuracy: None,
        };
        match classifier {
            Classifier::Adaboost { ensemble } => {
                summary.stumps = Some(ensemble.stumps.len());
                summary.training_error_bound = Some(ensemble.training_error_bound());
            }
            Classifier::SvmLinear { model } => {
                summary.support_vectors = Some(model.dual_coefficients.len());
                summary.c = Some(model.kernel.c);
            }
            Classifier::SvmRbf { model, grid } => {
                summary.support_vectors = Some(model.dual_coefficients.len());
                summary.c = Some(model.kernel.c);
                summary.gamma = Some(model.kernel.gamma);
                summary.cv_accuracy = grid.as_ref().map(|g| g.best_accuracy);
            }
        }
        summary
    }
}

fn train(config: &ExperimentConfig, train: &Samples) -> Result<Classifier> {
    Ok(match config.classifier {
        ClassifierKind::Adaboost => Classifier::Adaboost {
            ensemble: train_adaboost(train, config.rounds)?,
        },
        ClassifierKind::SvmLinear => Classifier::SvmLinear {
            model: train_linear_svm(train, config.linear_c)?,
        },
        ClassifierKind::SvmRbf => {
            let cv = subsample(train, config.cv_max_rows, config.split.seed)?;
            let smo = SmoParams {
                working_set: WorkingSet::SecondOrder,
                ..SmoParams::default()
            };
            let grid = grid_search_cv_with(&cv, &config.c_grid, &config.gamma_grid, config.folds, config.split.seed, &smo)?;
            let model = train_smo(&subsample(train, config.rbf_max_rows, config.split.seed)?, grid.best, &smo)?;
            Classifier::SvmRbf { model, grid: Some(grid) }
        }
    })
}

/// Stratified subset of at most `max_rows` rows.
fn subsample(data: &Samples, max_rows: usize, seed: u64) -> Result<Samples> {
    if data.len() <= max_rows {
        return Ok(data.clone());
    }
    let spec = SplitSpec {
        train_fraction: max_rows as f64 / data.len() as f64,
        seed,
    };
    Ok(data.subset(&stratified_split_indices(&data.y, &spec)?.0))
}

/// Split, scale and train one participant.
pub fn train_participant(data: &LabeledDataset, config: &ExperimentConfig) -> Result<ModelFile> {
    config.validate()?;
    data.require_trainable()?;
    let all = Samples::from_dataset(data, config.modality);
    let (train_idx, test_idx) = stratified_split_indices(&all.y, &config.split)?;
    let (train_s, _, scaler) = scale_to_unit_range(&all.subset(&train_idx), &all.subset(&test_idx));
    let classifier = train(config, &train_s)?;
    Ok(ModelFile::new(data.participant_id.clone(), config.modality, config.split, scaler, classifier))
}

/// Evaluates a trained model on the test part of the split it was trained
/// with and traces its predictions over the whole session.
pub fn evaluate_participant(data: &LabeledDataset, segments: &[TaskSegment], model: ModelFile, top_k: usize) -> Result<ParticipantOutcome> {
    if model.participant_id != data.participant_id {
        return Err(Error::Config(format!(
            "model for {} applied to data of {}",
            model.participant_id, data.participant_id
        )));
    }
    let all = Samples::from_dataset(data, model.modality);
    let (train_idx, test_idx) = stratified_split_indices(&all.y, &model.split)?;
    let scaled: Vec<Vec<f64>> = all.x.iter().map(|r| model.scaler.transform_row(r)).collect();
    let pred = predict_all(&model.classifier, &scaled)?;
    let pick = |idx: &[usize]| -> (Vec<Label>, Vec<Label>) { idx.iter().map(|&i| (pred[i], all.y[i])).unzip() };

    let (train_pred, train_truth) = pick(&train_idx);
    let (_, train_metrics) = evaluate(&train_pred, &train_truth)?;
    let (test_pred, test_truth) = pick(&test_idx);
    let (confusion, metrics) = evaluate(&test_pred, &test_truth)?;

    let timestamps: Vec<f64> = data.rows.iter().map(|r| r.vector.timestamp).collect();
    let rate = if timestamps.len() > 1 {
        (timestamps.len() - 1) as f64 / (timestamps[timestamps.len() - 1] - timestamps[0])
    } else {
        10.0
    };
    let trace = prediction_trace(&timestamps, &all.y, &pred, segments, rate)?;
    let ranking = model.classifier.ensemble().map(|e| rank_features(e, top_k)).unwrap_or_default();

    let result = ParticipantResult {
        participant_id: data.participant_id.clone(),
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        stress_rows: data.count(Label::Stress),
        neutral_rows: data.count(Label::Neutral),
        train_accuracy: train_metrics.accuracy,
        confusion,
        metrics,
        percentages: confusion.percentages(),
        ranking,
        model: ModelSummary::of(&model.classifier),
        false_alarm_s: trace.false_alarm_s(),
        wrong_runs: trace.wrong_runs.len(),
    };
    Ok(ParticipantOutcome { result, model, trace })
}

/// Split, scale, train and evaluate one participant.
pub fn run_participant(data: &LabeledDataset, segments: &[TaskSegment], config: &ExperimentConfig) -> Result<ParticipantOutcome> {
    let model = train_participant(data, config)?;
    evaluate_participant(data, segments, model, config.top_k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    /// Mean of per-participant row percentages.
    pub mean_percentages: ConfusionPercentages,
    /// Counts summed over participants.
    pub pooled: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub modality: Modality,
    pub classifier: ClassifierKind,
    pub config: ExperimentConfig,
    pub participants: Vec<ParticipantResult>,
    pub cohort: CohortMetrics,
    /// Share of the majority class in each participant's test part, averaged.
    pub majority_rate: f64,
    pub confusion: ConfusionSummary,
    /// Cohort appearance frequencies of ranked features (AdaBoost only).
    pub ranking: Vec<FeatureFrequency>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {}: accuracy {}",
            self.modality,
            self.classifier,
            self.cohort.accuracy.display()
        )
    }
}

pub fn build_report(config: &ExperimentConfig, participants: Vec<ParticipantResult>) -> Result<ExperimentReport> {
    let metrics: Vec<Metrics> = participants.iter().map(|p| p.metrics).collect();
    let cohort = aggregate_cohort(&metrics)?;
    let percentages: Vec<ConfusionPercentages> = participants.iter().map(|p| p.percentages).collect();
    let pooled = participants
        .iter()
        .fold(ConfusionMatrix::default(), |acc, p| acc + p.confusion);
    let majority_rate = participants
        .iter()
        .map(|p| p.confusion.positives().max(p.confusion.negatives()) as f64 / p.confusion.total() as f64)
        .sum::<f64>()
        / participants.len() as f64;
    let rankings: Vec<Vec<String>> = participants.iter().map(|p| p.ranking.clone()).filter(|r| !r.is_empty()).collect();
    let ranking = if rankings.is_empty() {
        Vec::new()
    } else {
        cohort_frequencies(&rankings, config.top_k)
    };
    Ok(ExperimentReport {
        modality: config.modality,
        classifier: config.classifier,
        config: config.clone(),
        participants,
        cohort,
        majority_rate,
        confusion: ConfusionSummary {
            mean_percentages: mean_confusion_percentages(&percentages),
            pooled,
        },
        ranking,
    })
}

/// Runs every participant and assembles the report; outcomes keep
/// cohort order.
pub fn run_experiment(sessions: &[(LabeledDataset, Vec<TaskSegment>)], config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<ParticipantOutcome>)> {
    if sessions.is_empty() {
        return Err(Error::Config("no participants to run".into()));
    }
    let outcomes: Vec<ParticipantOutcome> = sessions
        .par_iter()
        .map(|(data, segs)| run_participant(data, segs, config))
        .collect::<Result<_>>()?;
    let report = build_report(config, outcomes.iter().map(|o| o.result.clone()).collect())?;
    Ok((report, outcomes))
}

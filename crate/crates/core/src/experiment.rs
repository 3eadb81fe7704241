//! Cross-validated encoding × model grids.
//!
//! A grid computes one stratified fold assignment and evaluates every
//! (encoding, model) cell on it. Two-stage families train a premise-only
//! model inside each training split and feed its score, together with the
//! conclusion block, to a second model of the same family.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{fit, score_to_label, ClassifierError, ModelFamily, ModelSpec, TrainedModel};
use crate::domain::Dataset;
use crate::encoding::{encode_with, EncodingError, EncodingFamily, EncodingSpec, FeatureVector, OverflowPolicy};
use crate::evaluation::{
    aggregate, confusion, macro_metrics, stratified_kfold, Aggregate, EvalError, FoldAssignment, MetricSet, StdKind,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Evaluation(#[from] EvalError),
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
}

/// Switches that change how cells are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunOptions {
    /// Score two-stage training rows out-of-fold with an inner stratified split
    /// instead of in-sample.
    pub inner_cv: bool,
    /// Threshold stage-one scores at 0.5 before stage two.
    pub hard_stage1: bool,
    pub std_kind: StdKind,
    pub truncate: bool,
}

impl RunOptions {
    fn overflow(&self) -> OverflowPolicy {
        if self.truncate {
            OverflowPolicy::Truncate
        } else {
            OverflowPolicy::Error
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub encodings: Vec<EncodingFamily>,
    pub models: Vec<ModelSpec>,
    pub k: usize,
    /// Seeds the fold assignment.
    pub seed: u64,
    pub options: RunOptions,
}

impl ExperimentConfig {
    /// The full 8 × 4 grid with default hyperparameters.
    pub fn full_grid(k: usize, seed: u64) -> Self {
        ExperimentConfig {
            encodings: EncodingFamily::ALL.to_vec(),
            models: ModelFamily::ALL.iter().map(|&f| ModelSpec::new(f).with_seed(seed)).collect(),
            k,
            seed,
            options: RunOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.encodings.is_empty() {
            return Err(ExperimentError::InvalidConfig("no encodings selected".into()));
        }
        if self.models.is_empty() {
            return Err(ExperimentError::InvalidConfig("no models selected".into()));
        }
        if self.k < 2 {
            return Err(EvalError::KTooSmall(self.k).into());
        }
        for m in &self.models {
            m.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub scores: Vec<f64>,
    pub predictions: Vec<bool>,
    pub metrics: MetricSet,
    /// Rows the stage-one model trained on, for two-stage families.
    pub stage_one_train: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub encoding: EncodingFamily,
    pub model: ModelFamily,
    pub fold_fingerprint: u64,
    pub folds: Vec<FoldOutcome>,
}

impl CellResult {
    pub fn metrics(&self) -> Vec<MetricSet> {
        self.folds.iter().map(|f| f.metrics).collect()
    }
}

fn encode_all(d: &Dataset, spec: EncodingSpec, overflow: OverflowPolicy) -> Result<Vec<FeatureVector>, EncodingError> {
    d.messages().iter().map(|m| encode_with(m, spec, None, overflow)).collect()
}

fn subset<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

fn scores(model: &TrainedModel, rows: &[FeatureVector]) -> Result<Vec<f64>, ClassifierError> {
    rows.iter().map(|r| model.predict_score(r)).collect()
}

/// Stage-one scores for the training rows and the test rows of one fold.
fn stage_one_scores(
    spec: &ModelSpec,
    features: &[FeatureVector],
    labels: &[bool],
    train: &[usize],
    test: &[usize],
    opts: &RunOptions,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>), ExperimentError> {
    let train_x = subset(features, train);
    let train_y = subset(labels, train);
    let model = fit(spec, &train_x, &train_y)?;
    let test_scores = scores(&model, &subset(features, test))?;
    let train_scores = if opts.inner_cv {
        let inner = stratified_kfold(&train_y, k, spec.seed)?;
        let mut out = vec![0.0; train.len()];
        for f in 0..k {
            let (fit_idx, score_idx) = (inner.train_indices(f), inner.test_indices(f));
            let m = fit(spec, &subset(&train_x, &fit_idx), &subset(&train_y, &fit_idx))?;
            for i in score_idx {
                out[i] = m.predict_score(&train_x[i])?;
            }
        }
        out
    } else {
        scores(&model, &train_x)?
    };
    Ok((train_scores, test_scores))
}

/// Trains and evaluates one (encoding, model) pair on every fold.
pub fn run_cell(
    d: &Dataset,
    enc: EncodingSpec,
    spec: &ModelSpec,
    folds: &FoldAssignment,
    opts: &RunOptions,
) -> Result<CellResult, ExperimentError> {
    let labels = d.labels();
    let overflow = opts.overflow();
    let direct = match enc.family.stage_one_family() {
        None => Some(encode_all(d, enc, overflow)?),
        Some(_) => None,
    };
    let stage_one = match enc.family.stage_one_family() {
        Some(family) => Some(encode_all(d, EncodingSpec::new(family, enc.capacity), overflow)?),
        None => None,
    };
    let mut outcomes = Vec::with_capacity(folds.k());
    for fold in 0..folds.k() {
        let train = folds.train_indices(fold);
        let test = folds.test_indices(fold);
        let (train_x, test_x, stage_one_train) = match (&direct, &stage_one) {
            (Some(x), _) => (subset(x, &train), subset(x, &test), None),
            (None, Some(premise_x)) => {
                let (mut tr, mut te) = stage_one_scores(spec, premise_x, &labels, &train, &test, opts, folds.k())?;
                if opts.hard_stage1 {
                    for s in tr.iter_mut().chain(te.iter_mut()) {
                        *s = if score_to_label(*s) { 1.0 } else { 0.0 };
                    }
                }
                let stage_two = |idx: &[usize], s: &[f64]| -> Result<Vec<FeatureVector>, EncodingError> {
                    idx.iter()
                        .zip(s)
                        .map(|(&i, &score)| encode_with(&d.messages()[i], enc, Some(score), overflow))
                        .collect()
                };
                (stage_two(&train, &tr)?, stage_two(&test, &te)?, Some(train.clone()))
            }
            (None, None) => unreachable!("every family has a direct or a stage-one encoding"),
        };
        let model = fit(spec, &train_x, &subset(&labels, &train))?;
        let fold_scores = scores(&model, &test_x)?;
        let predictions: Vec<bool> = fold_scores.iter().map(|&s| score_to_label(s)).collect();
        let cm = confusion(&predictions, &subset(&labels, &test))?;
        outcomes.push(FoldOutcome {
            fold,
            test_indices: test,
            scores: fold_scores,
            predictions,
            metrics: macro_metrics(&cm)?,
            stage_one_train,
        });
    }
    Ok(CellResult {
        encoding: enc.family,
        model: spec.family,
        fold_fingerprint: folds.fingerprint(),
        folds: outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub encoding: EncodingFamily,
    pub model: ModelFamily,
    pub fold_fingerprint: u64,
    pub folds: Vec<MetricSet>,
    pub aggregate: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub k: usize,
    pub seed: u64,
    pub premise_capacity: usize,
    pub std_kind: StdKind,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, encoding: EncodingFamily, model: ModelFamily) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.encoding == encoding && r.model == model)
    }
}

/// Runs every configured cell on one shared fold assignment. Cells are
/// evaluated in parallel on the current rayon pool; rows come back in
/// encoding-major, model-minor order.
pub fn run_grid_cells(d: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<CellResult>, ExperimentError> {
    cfg.validate()?;
    let folds = stratified_kfold(&d.labels(), cfg.k, cfg.seed)?;
    let capacity = d.premise_capacity();
    let cells: Vec<(EncodingFamily, &ModelSpec)> = cfg
        .encodings
        .iter()
        .flat_map(|&e| cfg.models.iter().map(move |m| (e, m)))
        .collect();
    cells
        .par_iter()
        .map(|&(family, spec)| run_cell(d, EncodingSpec::new(family, capacity), spec, &folds, &cfg.options))
        .collect()
}

pub fn run_grid(d: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    let cells = run_grid_cells(d, cfg)?;
    let rows = cells
        .into_iter()
        .map(|c| {
            let folds = c.metrics();
            Ok(ReportRow {
                encoding: c.encoding,
                model: c.model,
                fold_fingerprint: c.fold_fingerprint,
                aggregate: aggregate(&folds, cfg.options.std_kind)?,
                folds,
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    Ok(ExperimentReport {
        k: cfg.k,
        seed: cfg.seed,
        premise_capacity: d.premise_capacity(),
        std_kind: cfg.options.std_kind,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Self::Markdown),
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(ExperimentError::UnknownFormat(other.to_string())),
        }
    }
}

/// Three decimals with ties going to the even digit.
pub fn format_3dp(x: f64) -> String {
    // Display rounding works on the exact binary value and breaks exact
    // ties to even.
    format!("{x:.3}")
}

pub fn emit_report(r: &ExperimentReport, format: ReportFormat) -> Result<String, ExperimentError> {
    if r.rows.is_empty() {
        return Err(ExperimentError::InvalidConfig("report has no rows".into()));
    }
    let mut out = String::new();
    match format {
        ReportFormat::Markdown => {
            let cell = |s: &crate::evaluation::Summary| format!("{} ± {}", format_3dp(s.mean), format_3dp(s.std));
            out.push_str("| Encoding | Model | Precision | Recall | Macro F1 |\n");
            out.push_str("|---|---|---|---|---|\n");
            for row in &r.rows {
                let a = &row.aggregate;
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    row.encoding,
                    row.model,
                    cell(&a.precision),
                    cell(&a.recall),
                    cell(&a.f1)
                );
            }
        }
        ReportFormat::Csv => {
            out.push_str("encoding,model,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n");
            for row in &r.rows {
                let a = &row.aggregate;
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    row.encoding,
                    row.model,
                    a.precision.mean,
                    a.precision.std,
                    a.recall.mean,
                    a.recall.std,
                    a.f1.mean,
                    a.f1.std
                );
            }
        }
        ReportFormat::Json => {
            out = serde_json::to_string_pretty(r).expect("report serializes");
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{generate, GeneratorConfig, GeneratorMode};

    fn small() -> Dataset {
        generate(&GeneratorConfig::new(GeneratorMode::Table1, 40, 30, 2)).unwrap()
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(format_3dp(0.0625), "0.062");
        assert_eq!(format_3dp(0.1875), "0.188");
        assert_eq!(format_3dp(0.7014), "0.701");
        assert_eq!(format_3dp(0.0), "0.000");
    }

    #[test]
    fn single_class_dataset_fails_to_split() {
        let d = generate(&GeneratorConfig::new(GeneratorMode::Table1, 10, 1, 0)).unwrap();
        let mut cfg = ExperimentConfig::full_grid(5, 0);
        cfg.models.truncate(1);
        assert!(matches!(
            run_grid(&d, &cfg),
            Err(ExperimentError::Evaluation(EvalError::ClassTooSmall { .. }))
        ));
    }

    #[test]
    fn stage_one_never_sees_test_rows() {
        let d = small();
        let folds = stratified_kfold(&d.labels(), 5, 0).unwrap();
        for inner_cv in [false, true] {
            let opts = RunOptions { inner_cv, ..RunOptions::default() };
            for family in [EncodingFamily::ArgStrCGivenP, EncodingFamily::ArgStrCGivenPCw] {
                let enc = EncodingSpec::new(family, d.premise_capacity());
                let cell = run_cell(&d, enc, &ModelSpec::new(ModelFamily::Lgr), &folds, &opts).unwrap();
                for f in &cell.folds {
                    let seen = f.stage_one_train.as_ref().unwrap();
                    assert!(f.test_indices.iter().all(|t| !seen.contains(t)));
                    let ids: Vec<&str> = seen.iter().map(|&i| d.messages()[i].id.as_str()).collect();
                    assert!(f.test_indices.iter().all(|&t| !ids.contains(&d.messages()[t].id.as_str())));
                }
            }
        }
    }

    #[test]
    fn hard_stage_one_scores_are_binary_inputs() {
        let d = small();
        let folds = stratified_kfold(&d.labels(), 5, 0).unwrap();
        let opts = RunOptions { hard_stage1: true, ..RunOptions::default() };
        let enc = EncodingSpec::new(EncodingFamily::ArgStrCGivenP, d.premise_capacity());
        let cell = run_cell(&d, enc, &ModelSpec::new(ModelFamily::Rforest), &folds, &opts).unwrap();
        assert_eq!(cell.folds.len(), 5);
    }

    #[test]
    fn report_formats() {
        let d = small();
        let mut cfg = ExperimentConfig::full_grid(5, 0);
        cfg.encodings = vec![EncodingFamily::ArgStr];
        cfg.models = vec![ModelSpec::new(ModelFamily::Lgr)];
        let r = run_grid(&d, &cfg).unwrap();
        let md = emit_report(&r, ReportFormat::Markdown).unwrap();
        assert!(md.starts_with("| Encoding | Model | Precision | Recall | Macro F1 |"));
        assert_eq!(md.lines().count(), 3);
        assert_eq!(md, emit_report(&r, ReportFormat::Markdown).unwrap());
        let csv = emit_report(&r, ReportFormat::Csv).unwrap();
        assert_eq!(csv.lines().count(), 2);
        let json: ExperimentReport = serde_json::from_str(&emit_report(&r, ReportFormat::Json).unwrap()).unwrap();
        assert_eq!(json, r);
        assert!(matches!("html".parse::<ReportFormat>(), Err(ExperimentError::UnknownFormat(_))));
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::full_grid(5, 0);
        cfg.encodings.clear();
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::full_grid(1, 0);
        assert!(cfg.validate().is_err());
    }
}

//! Cross-validated comparison of the personalized ensembles against
//! single-configuration baselines.

mod folds;
mod metrics;
mod report;

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use folds::{make_stratified_folds, FoldSpec};
pub use metrics::{mae, mean, median, median_ae};
pub use report::{
    relative_advantage, win_count, ConfusionMatrix, FoldSummary, ReportMetadata, Scenario,
    ScenarioCell, ScenarioReport,
};

pub use crate::target::{transform_target, TargetTransform};

use crate::error::{Error, Result};
use crate::io::{MemberSummary, PerformanceRecord};
use crate::ela::FeatureVector;
use crate::personalize::{
    argmin_first, join_tables, train_on_rows, QTable, TrainOptions, TrainingRow,
};
use crate::rng::derive_seed;
use crate::trees::RMConfig;

/// Grid index with the smallest MAE pooled over every training row.
pub fn select_best_train(q: &QTable) -> usize {
    argmin_first(&q.pooled()).expect("q table has configs")
}

/// Grid index with the smallest training MAE on one problem.
pub fn select_best_train_instance(q: &QTable, problem_id: u32) -> Result<usize> {
    Ok(argmin_first(&q.column(problem_id)?).expect("q table has configs"))
}

/// Grid index with the smallest test MAE; `test_mae[c]` is config `c`'s
/// error pooled over all test residuals.
pub fn select_best_test(test_mae: &[f64]) -> Result<usize> {
    argmin_first(test_mae).ok_or_else(|| Error::contract("no configs to select from"))
}

/// Where Ensemble-class takes its class labels from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSource {
    #[default]
    Trained,
    /// Always the true class; Ensemble-class then coincides with Ensemble-ground.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub folds: usize,
    pub seed: u64,
    pub train: TrainOptions,
    pub class_source: ClassSource,
    /// Also pick the config with the best pooled test error.
    pub best_test: bool,
    pub algorithm: String,
    pub budget: u64,
    pub sample_multiplier: Option<usize>,
    pub dim: Option<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            folds: 5,
            seed: 0,
            train: TrainOptions::default(),
            class_source: ClassSource::Trained,
            best_test: true,
            algorithm: String::new(),
            budget: 0,
            sample_multiplier: None,
            dim: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub report: ScenarioReport,
    pub confusion: ConfusionMatrix,
    /// Per fold and test row: (problem, instance, scenario predictions).
    pub predictions: Vec<Vec<RowPredictions>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowPredictions {
    pub problem_id: u32,
    pub instance_id: u32,
    pub predicted_class: u32,
    pub values: BTreeMap<Scenario, f64>,
}

/// Held-out targets of one fold. Reads are counted until the fold's
/// predictions are sealed.
pub struct TargetVault {
    values: Vec<f64>,
    sealed: Cell<bool>,
    early_reads: Cell<usize>,
}

impl TargetVault {
    pub fn new(values: Vec<f64>) -> Self {
        TargetVault {
            values,
            sealed: Cell::new(false),
            early_reads: Cell::new(0),
        }
    }

    pub fn seal(&self) {
        self.sealed.set(true);
    }

    pub fn read(&self, i: usize) -> f64 {
        if !self.sealed.get() {
            self.early_reads.set(self.early_reads.get() + 1);
        }
        self.values[i]
    }

    pub fn early_reads(&self) -> usize {
        self.early_reads.get()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

struct FoldOutcome {
    test: Vec<RowPredictions>,
    config_predictions: Vec<Vec<f64>>,
    truths: Vec<f64>,
    summary: FoldSummary,
}

fn run_fold(
    rows: &[TrainingRow],
    grid: &[RMConfig],
    spec: &FoldSpec,
    t: usize,
    opts: &EvalOptions,
) -> Result<FoldOutcome> {
    let fold_seed = derive_seed(&[opts.seed, t as u64]);
    let test_keys: BTreeSet<(u32, u32)> = spec.folds[t].iter().copied().collect();
    let (test_rows, train_rows): (Vec<&TrainingRow>, Vec<&TrainingRow>) = rows
        .iter()
        .partition(|r| test_keys.contains(&(r.problem_id, r.instance_id)));
    let train: Vec<TrainingRow> = train_rows.into_iter().cloned().collect();
    // features go to the trainer, targets into the vault
    let queries: Vec<Vec<f64>> = test_rows.iter().map(|r| r.features.clone()).collect();
    let vault = TargetVault::new(test_rows.iter().map(|r| r.target).collect());

    let train_opts = TrainOptions {
        seed: fold_seed,
        ..opts.train.clone()
    };
    let outcome = train_on_rows(&train, grid, &queries, &train_opts)?;
    let model = &outcome.model;
    let q = &outcome.q_table;
    let best_train = select_best_train(q);

    let mut preds = Vec::with_capacity(test_rows.len());
    let mut correct = 0;
    let mut best_train_instance = BTreeMap::new();
    for (j, r) in test_rows.iter().enumerate() {
        let bti = select_best_train_instance(q, r.problem_id)?;
        best_train_instance.insert(r.problem_id, grid[bti].canonical_name());
        let ground = model.predict_for_class(&r.features, r.problem_id)?;
        let (class_pred, class) = match opts.class_source {
            ClassSource::Trained => model.predict_values(&r.features)?,
            ClassSource::Oracle => (model.predict_for_class(&r.features, r.problem_id)?, r.problem_id),
        };
        correct += usize::from(class == r.problem_id);
        let values: BTreeMap<Scenario, f64> = [
            (Scenario::BestTrain, outcome.query_predictions[best_train][j]),
            (Scenario::BestTrainInstance, outcome.query_predictions[bti][j]),
            (Scenario::EnsembleGround, ground),
            (Scenario::EnsembleClass, class_pred),
        ]
        .into();
        if let Some((s, _)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Internal(format!(
                "non-finite {} prediction for problem {} instance {}",
                s.name(),
                r.problem_id,
                r.instance_id
            )));
        }
        preds.push(RowPredictions {
            problem_id: r.problem_id,
            instance_id: r.instance_id,
            predicted_class: class,
            values,
        });
    }

    vault.seal();
    let truths: Vec<f64> = (0..vault.len()).map(|i| vault.read(i)).collect();
    let ensembles = model
        .ensembles
        .iter()
        .map(|(&c, e)| {
            let members = e
                .members
                .iter()
                .map(|m| MemberSummary {
                    config: m.config.canonical_name(),
                    q: m.q,
                    weight: m.weight,
                })
                .collect();
            (c, members)
        })
        .collect();
    Ok(FoldOutcome {
        summary: FoldSummary {
            fold: t,
            seed: fold_seed,
            test_instances: spec.instance_ids[t].clone(),
            best_train: grid[best_train].canonical_name(),
            best_train_instance,
            ensembles,
            classifier_correct: correct,
            classifier_total: test_rows.len(),
            early_target_reads: vault.early_reads(),
        },
        test: preds,
        config_predictions: outcome.query_predictions,
        truths,
    })
}

/// Runs the full cross-validation on joined rows.
pub fn run_evaluation(rows: &[TrainingRow], grid: &[RMConfig], opts: &EvalOptions) -> Result<EvaluationResult> {
    if grid.is_empty() {
        return Err(Error::contract("empty configuration grid"));
    }
    let keys: Vec<(u32, u32)> = rows.iter().map(|r| (r.problem_id, r.instance_id)).collect();
    let spec = make_stratified_folds(&keys, opts.folds)?;
    let outcomes = (0..spec.k())
        .into_par_iter()
        .map(|t| run_fold(rows, grid, &spec, t, opts))
        .collect::<Result<Vec<_>>>()?;

    let best_test = if opts.best_test {
        let mut sums = vec![0.0; grid.len()];
        let mut n = 0usize;
        for o in &outcomes {
            for (c, preds) in o.config_predictions.iter().enumerate() {
                sums[c] += preds.iter().zip(&o.truths).map(|(p, t)| (p - t).abs()).sum::<f64>();
            }
            n += o.truths.len();
        }
        let pooled: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        Some(select_best_test(&pooled)?)
    } else {
        None
    };

    let classes: Vec<u32> = keys.iter().map(|k| k.0).collect();
    let mut confusion = ConfusionMatrix::new(classes);
    let mut errors: BTreeMap<u32, BTreeMap<Scenario, Vec<f64>>> = BTreeMap::new();
    let mut predictions = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let mut fold_preds = Vec::with_capacity(o.test.len());
        for (j, (row, truth)) in o.test.iter().zip(&o.truths).enumerate() {
            let mut row = row.clone();
            if let Some(b) = best_test {
                row.values.insert(Scenario::BestTest, o.config_predictions[b][j]);
            }
            confusion.add(row.problem_id, row.predicted_class)?;
            let cell = errors.entry(row.problem_id).or_default();
            for (s, v) in &row.values {
                cell.entry(*s).or_default().push((v - truth).abs());
            }
            fold_preds.push(row);
        }
        predictions.push(fold_preds);
    }
    let problems = errors
        .into_iter()
        .map(|(p, cells)| {
            let cells = cells
                .into_iter()
                .map(|(s, e)| Ok((s, ScenarioCell::from_errors(e)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok((p, cells))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;

    let metadata = ReportMetadata {
        algorithm: opts.algorithm.clone(),
        budget: opts.budget,
        sample_multiplier: opts.sample_multiplier,
        dim: opts.dim,
        target_transform: opts.train.target_transform.name().to_string(),
        seed: opts.seed,
        fold_seeds: outcomes.iter().map(|o| o.summary.seed).collect(),
        class_source: match opts.class_source {
            ClassSource::Trained => "trained".into(),
            ClassSource::Oracle => "oracle".into(),
        },
        weighting: match opts.train.weighting {
            crate::personalize::WeightSource::TrainingFit => "training_fit".into(),
            crate::personalize::WeightSource::HoldOut => "hold_out".into(),
        },
        n_configs: grid.len(),
        best_test: best_test.map(|b| grid[b].canonical_name()),
        best_test_aggregation: "pooled absolute residuals over all test folds".into(),
    };
    Ok(EvaluationResult {
        report: ScenarioReport {
            metadata,
            problems,
            folds: outcomes.into_iter().map(|o| o.summary).collect(),
        },
        confusion,
        predictions,
    })
}

/// Joins the tables for one (algorithm, budget) pair and evaluates.
pub fn run_evaluation_tables(
    features: &[FeatureVector],
    performance: &[PerformanceRecord],
    grid: &[RMConfig],
    opts: &EvalOptions,
) -> Result<EvaluationResult> {
    let rows = join_tables(
        features,
        performance,
        &opts.algorithm,
        opts.budget,
        opts.train.target_transform,
    )?;
    run_evaluation(&rows, grid, opts)
}

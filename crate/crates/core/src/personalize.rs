//! Per-class personalized ensembles: score every grid configuration on each
//! problem class, keep the best configuration of every technique, weight the
//! survivors by min-max normalized training error, and gate prediction with
//! the class classifier.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ela::FeatureVector;
use crate::error::{Error, Result};
use crate::io::PerformanceRecord;
use crate::rng::derive_seed;
use crate::target::TargetTransform;
use crate::trees::{
    fit_classifier_ensemble_with, fit_regressor, ClassifierConfig, ClassifierEnsemble, RMConfig,
    Technique, TrainedRegressor,
};

/// One joined (features, target) row. `target` is already transformed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRow {
    pub problem_id: u32,
    pub instance_id: u32,
    pub features: Vec<f64>,
    pub target: f64,
}

/// Joins feature vectors with the precision of one (algorithm, budget) pair.
pub fn join_tables(
    features: &[FeatureVector],
    performance: &[PerformanceRecord],
    algorithm: &str,
    budget: u64,
    transform: TargetTransform,
) -> Result<Vec<TrainingRow>> {
    let mut targets: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for r in performance
        .iter()
        .filter(|r| r.algorithm == algorithm && r.budget == budget)
    {
        if targets
            .insert((r.problem_id, r.instance_id), r.target_precision)
            .is_some()
        {
            return Err(Error::data(format!(
                "duplicate performance record for problem {} instance {}",
                r.problem_id, r.instance_id
            )));
        }
    }
    if targets.is_empty() {
        return Err(Error::data(format!(
            "performance table has no rows for algorithm `{algorithm}` at budget {budget}"
        )));
    }
    let feature_keys: BTreeSet<(u32, u32)> =
        features.iter().map(|f| (f.problem_id, f.instance_id)).collect();
    if feature_keys.len() != features.len() {
        return Err(Error::data("feature table holds duplicate (problem_id, instance_id) keys"));
    }
    let mut orphans: Vec<String> = features
        .iter()
        .filter(|f| !targets.contains_key(&(f.problem_id, f.instance_id)))
        .map(|f| format!("features({},{})", f.problem_id, f.instance_id))
        .collect();
    orphans.extend(
        targets
            .keys()
            .filter(|k| !feature_keys.contains(k))
            .map(|(p, i)| format!("performance({p},{i})")),
    );
    if !orphans.is_empty() {
        return Err(Error::data(format!("join mismatch, orphan keys: {}", orphans.join(" "))));
    }
    let mut rows = features
        .iter()
        .map(|f| {
            Ok(TrainingRow {
                problem_id: f.problem_id,
                instance_id: f.instance_id,
                features: f.values.clone(),
                target: transform.apply(targets[&(f.problem_id, f.instance_id)])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.problem_id, r.instance_id));
    Ok(rows)
}

/// Mean absolute error of every configuration on every class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub configs: Vec<RMConfig>,
    /// Sorted class ids.
    pub classes: Vec<u32>,
    /// Rows scored per class, for pooled aggregation.
    pub counts: Vec<usize>,
    /// `values[c][k]`: MAE of config `c` on class `classes[k]`.
    pub values: Vec<Vec<f64>>,
}

impl QTable {
    pub fn class_index(&self, class_id: u32) -> Result<usize> {
        self.classes
            .binary_search(&class_id)
            .map_err(|_| Error::data(format!("class {class_id} is not in the q table")))
    }

    pub fn column(&self, class_id: u32) -> Result<Vec<f64>> {
        let k = self.class_index(class_id)?;
        Ok(self.values.iter().map(|row| row[k]).collect())
    }

    /// MAE over all scored rows, pooled across classes.
    pub fn pooled(&self) -> Vec<f64> {
        let total: usize = self.counts.iter().sum();
        self.values
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.counts)
                    .map(|(q, &n)| q * n as f64)
                    .sum::<f64>()
                    / total as f64
            })
            .collect()
    }
}

/// Builds a q table from per-config predictions on the scored rows.
pub fn q_table_from_predictions(
    configs: &[RMConfig],
    predictions: &[Vec<f64>],
    targets: &[f64],
    classes: &[u32],
) -> Result<QTable> {
    if predictions.len() != configs.len() {
        return Err(Error::contract("one prediction vector per config expected"));
    }
    if targets.len() != classes.len() || targets.is_empty() {
        return Err(Error::contract("targets and class labels must be nonempty and aligned"));
    }
    let mut ids: Vec<u32> = classes.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let slot: Vec<usize> = classes
        .iter()
        .map(|c| ids.binary_search(c).unwrap())
        .collect();
    let mut counts = vec![0usize; ids.len()];
    for &s in &slot {
        counts[s] += 1;
    }
    let values = predictions
        .iter()
        .map(|preds| {
            if preds.len() != targets.len() {
                return Err(Error::contract("prediction vector length differs from targets"));
            }
            let mut sums = vec![0.0; ids.len()];
            for ((p, t), &s) in preds.iter().zip(targets).zip(&slot) {
                sums[s] += (p - t).abs();
            }
            Ok(sums.iter().zip(&counts).map(|(s, &n)| s / n as f64).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QTable {
        configs: configs.to_vec(),
        classes: ids,
        counts,
        values,
    })
}

/// Seed of one grid configuration, independent of its position in the grid.
pub fn config_seed(seed: u64, config: &RMConfig) -> u64 {
    let name = config.canonical_name();
    let h = name
        .bytes()
        .fold(0xC0F1_u64, |acc, b| derive_seed(&[acc, b as u64]));
    derive_seed(&[seed, h])
}

struct ConfigPredictions {
    on_rows: Vec<f64>,
    on_queries: Vec<f64>,
}

/// Fits every config on `(x, y)` and predicts `x` and `queries`; models are dropped.
fn fit_predict_all(
    x: &[Vec<f64>],
    y: &[f64],
    configs: &[RMConfig],
    queries: &[Vec<f64>],
    seed: u64,
) -> Result<Vec<ConfigPredictions>> {
    configs
        .par_iter()
        .map(|cfg| {
            let model = fit_regressor(x, y, cfg, config_seed(seed, cfg))?;
            let on_rows = x.iter().map(|r| model.predict(r)).collect::<Result<Vec<_>>>()?;
            let on_queries = queries
                .iter()
                .map(|r| model.predict(r))
                .collect::<Result<Vec<_>>>()?;
            Ok(ConfigPredictions { on_rows, on_queries })
        })
        .collect()
}

/// Fits every config on all rows and scores it per class.
pub fn score_configs_per_class(
    x: &[Vec<f64>],
    y: &[f64],
    classes: &[u32],
    configs: &[RMConfig],
    seed: u64,
) -> Result<QTable> {
    if classes.len() != x.len() {
        return Err(Error::contract("one class label per training row expected"));
    }
    let preds: Vec<Vec<f64>> = fit_predict_all(x, y, configs, &[], seed)?
        .into_iter()
        .map(|p| p.on_rows)
        .collect();
    q_table_from_predictions(configs, &preds, y, classes)
}

/// Index of the first minimum.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if v.partial_cmp(&values[b]) != Some(Ordering::Less) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Best config of each technique present in the table, for one class.
/// Returns indices into `q.configs` in technique order.
pub fn select_best_per_technique(q: &QTable, class_id: u32) -> Result<Vec<usize>> {
    let column = q.column(class_id)?;
    let mut picks = Vec::new();
    for technique in Technique::ALL {
        let mut best: Option<usize> = None;
        for (i, cfg) in q.configs.iter().enumerate() {
            if cfg.technique != technique {
                continue;
            }
            match best {
                Some(b) if column[i].partial_cmp(&column[b]) != Some(Ordering::Less) => {}
                _ => best = Some(i),
            }
        }
        picks.extend(best);
    }
    Ok(picks)
}

/// Min-max importance weights: the smallest error gets the largest weight,
/// the largest error weight zero. Equal errors give uniform weights.
pub fn compute_weights(q: &[f64]) -> Result<Vec<f64>> {
    if q.is_empty() {
        return Err(Error::contract("compute_weights needs at least one value"));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("compute_weights needs finite values"));
    }
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = q.iter().copied().fold(f64::INFINITY, f64::min);
    if max == min {
        return Ok(vec![1.0 / q.len() as f64; q.len()]);
    }
    let norm: Vec<f64> = q.iter().map(|v| (max - v) / (max - min)).collect();
    let total: f64 = norm.iter().sum();
    Ok(norm.iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMember {
    pub config: RMConfig,
    pub q: f64,
    pub weight: f64,
    pub model: TrainedRegressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEnsemble {
    pub class_id: u32,
    pub members: Vec<EnsembleMember>,
}

impl ClassEnsemble {
    pub fn member_predictions(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.members.iter().map(|m| m.model.predict(x)).collect()
    }

    /// Weighted member average, kept inside the members' range.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let ys = self.member_predictions(x)?;
        let y: f64 = ys.iter().zip(&self.members).map(|(y, m)| m.weight * y).sum();
        let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !y.is_finite() {
            return Err(Error::Internal(format!(
                "non-finite ensemble prediction for class {}",
                self.class_id
            )));
        }
        Ok(y.clamp(lo, hi))
    }
}

/// Which rows the member errors `q` come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSource {
    /// Errors on the rows the configs were fitted on.
    #[default]
    TrainingFit,
    /// Errors on the highest instance id of every class, with configs fitted
    /// on the remaining rows.
    HoldOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub target_transform: TargetTransform,
    pub seed: u64,
    pub weighting: WeightSource,
    /// With hold-out weighting, refit the selected configs on every training
    /// row (otherwise the hold-out fits are kept).
    pub refit_selected: bool,
    pub classifier: Vec<ClassifierConfig>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            target_transform: TargetTransform::NaturalLog,
            seed: 0,
            weighting: WeightSource::TrainingFit,
            refit_selected: true,
            classifier: ClassifierConfig::default_members().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalizedModel {
    pub classifier: ClassifierEnsemble,
    pub ensembles: BTreeMap<u32, ClassEnsemble>,
    pub target_transform: TargetTransform,
    pub seed: u64,
    pub weighting: WeightSource,
}

/// Everything produced while training on one split.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub model: PersonalizedModel,
    pub q_table: QTable,
    /// `query_predictions[c][j]`: config `c` fitted on every training row,
    /// applied to query `j`.
    pub query_predictions: Vec<Vec<f64>>,
}

/// Trains on already joined rows and, on the side, predicts `queries` with
/// every grid configuration.
pub fn train_on_rows(
    rows: &[TrainingRow],
    grid: &[RMConfig],
    queries: &[Vec<f64>],
    opts: &TrainOptions,
) -> Result<TrainingOutcome> {
    if rows.is_empty() {
        return Err(Error::contract("no training rows"));
    }
    if grid.is_empty() {
        return Err(Error::contract("empty configuration grid"));
    }
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.target).collect();
    let labels: Vec<u32> = rows.iter().map(|r| r.problem_id).collect();
    let seed = opts.seed;

    let full = fit_predict_all(&x, &y, grid, queries, seed)?;
    let (q_table, fit_rows) = match opts.weighting {
        WeightSource::TrainingFit => {
            let preds: Vec<Vec<f64>> = full.iter().map(|p| p.on_rows.clone()).collect();
            (q_table_from_predictions(grid, &preds, &y, &labels)?, None)
        }
        WeightSource::HoldOut => {
            let held = hold_out_mask(rows)?;
            let fit: Vec<usize> = (0..rows.len()).filter(|&i| !held[i]).collect();
            let eval: Vec<usize> = (0..rows.len()).filter(|&i| held[i]).collect();
            let fx: Vec<Vec<f64>> = fit.iter().map(|&i| x[i].clone()).collect();
            let fy: Vec<f64> = fit.iter().map(|&i| y[i]).collect();
            let ex: Vec<Vec<f64>> = eval.iter().map(|&i| x[i].clone()).collect();
            let reduced = fit_predict_all(&fx, &fy, grid, &ex, seed)?;
            let preds: Vec<Vec<f64>> = reduced.into_iter().map(|p| p.on_queries).collect();
            let ey: Vec<f64> = eval.iter().map(|&i| y[i]).collect();
            let el: Vec<u32> = eval.iter().map(|&i| labels[i]).collect();
            (q_table_from_predictions(grid, &preds, &ey, &el)?, Some((fx, fy)))
        }
    };
    let query_predictions = full.into_iter().map(|p| p.on_queries).collect();

    let (mx, my) = match (&fit_rows, opts.refit_selected) {
        (Some((fx, fy)), false) => (fx.as_slice(), fy.as_slice()),
        _ => (x.as_slice(), y.as_slice()),
    };
    let selections: Vec<(u32, Vec<usize>)> = q_table
        .classes
        .iter()
        .map(|&c| Ok((c, select_best_per_technique(&q_table, c)?)))
        .collect::<Result<_>>()?;
    let needed: BTreeSet<usize> = selections.iter().flat_map(|(_, s)| s.iter().copied()).collect();
    let fitted: BTreeMap<usize, TrainedRegressor> = needed
        .into_par_iter()
        .map(|i| Ok((i, fit_regressor(mx, my, &grid[i], config_seed(seed, &grid[i]))?)))
        .collect::<Result<_>>()?;

    let mut ensembles = BTreeMap::new();
    for (class_id, picks) in selections {
        let k = q_table.class_index(class_id)?;
        let qs: Vec<f64> = picks.iter().map(|&i| q_table.values[i][k]).collect();
        let ws = compute_weights(&qs)?;
        let members = picks
            .iter()
            .zip(qs.iter().zip(&ws))
            .map(|(&i, (&q, &weight))| EnsembleMember {
                config: grid[i],
                q,
                weight,
                model: fitted[&i].clone(),
            })
            .collect();
        ensembles.insert(class_id, ClassEnsemble { class_id, members });
    }

    let classifier = fit_classifier_ensemble_with(&x, &labels, &opts.classifier, derive_seed(&[seed, 0xC1A55]))?;
    if classifier.labels.iter().ne(ensembles.keys()) {
        return Err(Error::Internal("classifier labels differ from ensemble classes".into()));
    }
    Ok(TrainingOutcome {
        model: PersonalizedModel {
            classifier,
            ensembles,
            target_transform: opts.target_transform,
            seed,
            weighting: opts.weighting,
        },
        q_table,
        query_predictions,
    })
}

/// Marks the rows with the largest instance id of every class.
fn hold_out_mask(rows: &[TrainingRow]) -> Result<Vec<bool>> {
    let mut last: BTreeMap<u32, u32> = BTreeMap::new();
    let mut size: BTreeMap<u32, usize> = BTreeMap::new();
    for r in rows {
        let e = last.entry(r.problem_id).or_insert(r.instance_id);
        *e = (*e).max(r.instance_id);
        *size.entry(r.problem_id).or_default() += 1;
    }
    let mask: Vec<bool> = rows.iter().map(|r| last[&r.problem_id] == r.instance_id).collect();
    for (class, n) in size {
        let held = rows
            .iter()
            .zip(&mask)
            .filter(|(r, &m)| m && r.problem_id == class)
            .count();
        if held == n {
            return Err(Error::contract(format!(
                "class {class} has a single instance id, nothing left to fit on after holding out"
            )));
        }
    }
    Ok(mask)
}

/// Joins the tables, keeps the training instances, and trains.
#[allow(clippy::too_many_arguments)]
pub fn train_personalized(
    features: &[FeatureVector],
    performance: &[PerformanceRecord],
    algorithm: &str,
    budget: u64,
    training_instances: &[u32],
    grid: &[RMConfig],
    opts: &TrainOptions,
) -> Result<PersonalizedModel> {
    let rows: Vec<TrainingRow> = join_tables(features, performance, algorithm, budget, opts.target_transform)?
        .into_iter()
        .filter(|r| training_instances.contains(&r.instance_id))
        .collect();
    if rows.is_empty() {
        return Err(Error::data("no rows left for the requested training instances"));
    }
    Ok(train_on_rows(&rows, grid, &[], opts)?.model)
}

impl PersonalizedModel {
    pub fn classes(&self) -> Vec<u32> {
        self.ensembles.keys().copied().collect()
    }

    pub fn predict_for_class(&self, x: &[f64], class_id: u32) -> Result<f64> {
        self.ensembles
            .get(&class_id)
            .ok_or_else(|| Error::data(format!("class {class_id} is not in the model")))?
            .predict(x)
    }

    /// Classifies, then applies that class's ensemble.
    pub fn predict_values(&self, x: &[f64]) -> Result<(f64, u32)> {
        let class = self.classifier.predict_class(x)?;
        let ens = self.ensembles.get(&class).ok_or_else(|| {
            Error::Internal(format!("classifier returned class {class} without an ensemble"))
        })?;
        Ok((ens.predict(x)?, class))
    }
}

pub fn predict(model: &PersonalizedModel, fv: &FeatureVector) -> Result<(f64, u32)> {
    model.predict_values(&fv.values)
}

pub fn predict_with_known_class(model: &PersonalizedModel, fv: &FeatureVector, class_id: u32) -> Result<f64> {
    model.predict_for_class(&fv.values, class_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::Criterion;

    #[test]
    fn weight_examples() {
        let w = compute_weights(&[2.0, 4.0, 6.0]).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(w[2], 0.0);
        assert_eq!(compute_weights(&[5.0; 3]).unwrap(), vec![1.0 / 3.0; 3]);
        assert_eq!(compute_weights(&[0.1, 0.3]).unwrap(), vec![1.0, 0.0]);
        assert!(compute_weights(&[]).is_err());
        assert!(compute_weights(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn q_of_constant_model() {
        let cfg = [RMConfig::decision_tree(Criterion::Mse, 2)];
        let q = q_table_from_predictions(&cfg, &[vec![3.0, 3.0]], &[4.0, 2.0], &[1, 1]).unwrap();
        assert_eq!(q.values[0], vec![1.0]);
    }

    #[test]
    fn tie_break_is_grid_order() {
        let configs = vec![
            RMConfig::decision_tree(Criterion::Mse, 2),
            RMConfig::decision_tree(Criterion::Mse, 4),
            RMConfig::forest(Technique::RandomForest, Criterion::Mse, 2, 10),
        ];
        let q = QTable {
            configs,
            classes: vec![7],
            counts: vec![4],
            values: vec![vec![1.0], vec![1.0], vec![3.0]],
        };
        assert_eq!(select_best_per_technique(&q, 7).unwrap(), vec![0, 2]);
        assert!(select_best_per_technique(&q, 8).is_err());
    }

    #[test]
    fn argmin_prefers_first() {
        assert_eq!(argmin_first(&[3.0, 1.0, 1.0]), Some(1));
        assert_eq!(argmin_first(&[]), None);
    }
}

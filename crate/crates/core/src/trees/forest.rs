use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cart::{check_xy, grow_tree, GrowOptions, RegressionTree};
use super::config::{RMConfig, Technique};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

/// A fitted grid configuration: one tree for `DecisionTree`, `nest` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedRegressor {
    pub config: RMConfig,
    pub trees: Vec<RegressionTree>,
    pub bootstrap_seeds: Vec<u64>,
    pub training_fingerprint: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct ForestOptions {
    /// Resample rows with replacement for every tree.
    pub bootstrap: bool,
}

impl Default for ForestOptions {
    fn default() -> Self {
        ForestOptions { bootstrap: true }
    }
}

/// Hash of the training data bits.
pub fn fingerprint(x: &[Vec<f64>], y: &[f64]) -> u64 {
    let words = x
        .iter()
        .flatten()
        .chain(y)
        .map(|v| v.to_bits())
        .chain([x.len() as u64, y.len() as u64]);
    words.fold(0xF1E6_u64, |acc, w| derive_seed(&[acc, w]))
}

/// Features examined per split by a random forest.
pub fn sqrt_features(p: usize) -> usize {
    ((p as f64).sqrt().ceil() as usize).clamp(1, p)
}

/// Fits any grid configuration.
pub fn fit_regressor(x: &[Vec<f64>], y: &[f64], config: &RMConfig, seed: u64) -> Result<TrainedRegressor> {
    if config.technique.is_ensemble() {
        fit_forest(x, y, config, seed)
    } else {
        check_xy(x, y)?;
        let tree = super::cart::fit_tree(x, y, config.crit, config.minsplit)?;
        Ok(TrainedRegressor {
            config: *config,
            trees: vec![tree],
            bootstrap_seeds: Vec::new(),
            training_fingerprint: fingerprint(x, y),
        })
    }
}

pub fn fit_forest(x: &[Vec<f64>], y: &[f64], config: &RMConfig, seed: u64) -> Result<TrainedRegressor> {
    fit_forest_with(x, y, config, seed, ForestOptions::default())
}

pub fn fit_forest_with(
    x: &[Vec<f64>],
    y: &[f64],
    config: &RMConfig,
    seed: u64,
    opts: ForestOptions,
) -> Result<TrainedRegressor> {
    let p = check_xy(x, y)?;
    let nest = match (config.technique, config.nest) {
        (Technique::DecisionTree, _) => {
            return Err(Error::contract("fit_forest needs RandomForest or BaggingDT"))
        }
        (_, None) | (_, Some(0)) => return Err(Error::contract("forest needs nest >= 1")),
        (_, Some(n)) => n,
    };
    let max_features = match config.technique {
        Technique::RandomForest => Some(sqrt_features(p)),
        _ => None,
    };
    let n = x.len();
    let mut trees = Vec::with_capacity(nest);
    let mut seeds = Vec::with_capacity(nest);
    for t in 0..nest {
        let tree_seed = derive_seed(&[seed, t as u64]);
        let mut rng = rng_from(&[0xB007, tree_seed]);
        let rows: Vec<usize> = if opts.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        trees.push(grow_tree(
            x,
            y,
            &rows,
            config.crit,
            GrowOptions {
                minsplit: config.minsplit,
                max_features,
                rng: Some(&mut rng),
            },
        ));
        seeds.push(tree_seed);
    }
    Ok(TrainedRegressor {
        config: *config,
        trees,
        bootstrap_seeds: seeds,
        training_fingerprint: fingerprint(x, y),
    })
}

impl TrainedRegressor {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    /// Unweighted mean of the tree predictions.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::contract(format!(
                "query has {} features, model was trained on {}",
                x.len(),
                self.n_features()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }

    pub fn tree_predictions(&self, x: &[f64]) -> Vec<f64> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::cart::fit_tree;
    use crate::trees::config::Criterion;

    fn toy() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, ((i * 7) % 11) as f64, (i % 3) as f64])
            .collect();
        let y = x.iter().map(|r| r[0] * 0.5 + r[1] - r[2] * 2.0).collect();
        (x, y)
    }

    #[test]
    fn nest_controls_tree_count() {
        let (x, y) = toy();
        let cfg = RMConfig::forest(Technique::RandomForest, Criterion::Mse, 2, 10);
        let m = fit_forest(&x, &y, &cfg, 1).unwrap();
        assert_eq!(m.trees.len(), 10);
        assert_eq!(m.bootstrap_seeds.len(), 10);
    }

    #[test]
    fn bagging_without_bootstrap_equals_single_tree() {
        let (x, y) = toy();
        let cfg = RMConfig {
            technique: Technique::BaggingDT,
            crit: Criterion::Mse,
            minsplit: 4,
            nest: Some(1),
        };
        let m = fit_forest_with(&x, &y, &cfg, 3, ForestOptions { bootstrap: false }).unwrap();
        let t = fit_tree(&x, &y, Criterion::Mse, 4).unwrap();
        assert_eq!(m.trees[0], t);
        for r in &x {
            assert_eq!(m.predict(r).unwrap(), t.predict(r));
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (x, y) = toy();
        let cfg = RMConfig::forest(Technique::RandomForest, Criterion::Mae, 2, 20);
        let a = fit_forest(&x, &y, &cfg, 9).unwrap();
        let b = fit_forest(&x, &y, &cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.trees, fit_forest(&x, &y, &cfg, 10).unwrap().trees);
    }

    #[test]
    fn decision_tree_is_not_a_forest() {
        let (x, y) = toy();
        let cfg = RMConfig::decision_tree(Criterion::Mse, 2);
        assert!(fit_forest(&x, &y, &cfg, 0).is_err());
        let m = fit_regressor(&x, &y, &cfg, 0).unwrap();
        assert_eq!(m.trees.len(), 1);
        assert!(m.predict(&[1.0]).is_err());
    }

    #[test]
    fn sqrt_feature_count() {
        assert_eq!(sqrt_features(56), 8);
        assert_eq!(sqrt_features(1), 1);
        assert_eq!(sqrt_features(4), 2);
        assert_eq!(sqrt_features(5), 3);
    }
}

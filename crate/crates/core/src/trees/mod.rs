//! Tree-based regressors (DecisionTree, RandomForest, BaggingDT), their
//! hyperparameter grid, and the classifier ensemble.

mod cart;
mod classify;
mod config;
mod forest;

pub use cart::{fit_tree, Node, RegressionTree, SPLIT_TOLERANCE};
pub use classify::{
    fit_classifier_ensemble, fit_classifier_ensemble_with, majority_vote, ClassNode,
    ClassTreeOptions, ClassificationTree, ClassifierConfig, ClassifierEnsemble, ClassifierMember,
    SplitMeasure,
};
pub use config::{enumerate_grid, Criterion, RMConfig, Technique, MINSPLIT_GRID, NEST_GRID};
pub use forest::{
    fingerprint, fit_forest, fit_forest_with, fit_regressor, sqrt_features, ForestOptions,
    TrainedRegressor,
};

use crate::error::Result;

/// Fits a single CART regressor and wraps it as a [`TrainedRegressor`].
pub fn fit_tree_regressor(
    x: &[Vec<f64>],
    y: &[f64],
    crit: Criterion,
    minsplit: usize,
    seed: u64,
) -> Result<TrainedRegressor> {
    fit_regressor(x, y, &RMConfig::decision_tree(crit, minsplit), seed)
}

pub fn predict_regressor(model: &TrainedRegressor, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

pub fn predict_class(ens: &ClassifierEnsemble, x: &[f64]) -> Result<u32> {
    ens.predict_class(x)
}

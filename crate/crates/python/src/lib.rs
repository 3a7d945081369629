//! Python bindings: feature computation, the config grid, ensemble weights,
//! training and prediction through manifests, and cross-validated evaluation.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ppr_core::ela::{self, FeatureConfig, FeatureVector};
use ppr_core::evaluation::{run_evaluation_tables, EvalOptions};
use ppr_core::io::{load_feature_table, load_manifest, load_performance_table, save_manifest, Manifest};
use ppr_core::personalize::{self, train_personalized, TrainOptions};
use ppr_core::suite::{instantiate, uniform_sample, DesignSet};
use ppr_core::target::TargetTransform;
use ppr_core::trees::enumerate_grid;
use ppr_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Canonical names of the 430 regression configs, in grid order.
#[pyfunction]
fn config_grid() -> Vec<String> {
    enumerate_grid().iter().map(|c| c.canonical_name()).collect()
}

/// Ensemble weights from per-member errors (lower error, higher weight).
#[pyfunction]
fn compute_weights(q: Vec<f64>) -> PyResult<Vec<f64>> {
    personalize::compute_weights(&q).map_err(py_err)
}

#[pyfunction]
fn feature_names() -> Vec<String> {
    ela::feature_names().to_vec()
}

/// The 56 landscape features of an evaluated sample.
#[pyfunction]
#[pyo3(signature = (points, fitness, seed = 0))]
fn compute_features(points: Vec<Vec<f64>>, fitness: Vec<f64>, seed: u64) -> PyResult<Vec<f64>> {
    let ds = DesignSet::from_parts(0, 0, points, fitness).map_err(py_err)?;
    let cfg = FeatureConfig { seed, ..FeatureConfig::default() };
    Ok(ela::compute_features(&ds, &cfg).map_err(py_err)?.values)
}

/// Samples a built-in problem instance uniformly and computes its features.
#[pyfunction]
#[pyo3(signature = (problem, instance, dim, multiplier = 50, seed = 0))]
fn instance_features(problem: u32, instance: u32, dim: usize, multiplier: usize, seed: u64) -> PyResult<Vec<f64>> {
    let inst = instantiate(problem, instance, dim).map_err(py_err)?;
    let ds = uniform_sample(&inst, multiplier * dim, seed).map_err(py_err)?;
    let cfg = FeatureConfig::with_multiplier(multiplier, seed);
    Ok(ela::compute_features(&ds, &cfg).map_err(py_err)?.values)
}

fn parse_transform(target: &str) -> PyResult<TargetTransform> {
    target.parse().map_err(py_err)
}

/// A trained personalized model together with its manifest header.
#[pyclass(name = "Model")]
struct PyModel {
    manifest: Manifest,
}

#[pymethods]
impl PyModel {
    /// Trains on the given feature and performance CSV tables.
    #[staticmethod]
    #[pyo3(signature = (features, performance, algorithm, budget, training_instances = vec![1, 2, 3, 4, 5], target = "log", seed = 0))]
    fn train(
        features: &str,
        performance: &str,
        algorithm: &str,
        budget: u64,
        training_instances: Vec<u32>,
        target: &str,
        seed: u64,
    ) -> PyResult<Self> {
        let fv = load_feature_table(features).map_err(py_err)?;
        let perf = load_performance_table(performance).map_err(py_err)?;
        let opts = TrainOptions {
            target_transform: parse_transform(target)?,
            seed,
            ..TrainOptions::default()
        };
        let model = train_personalized(&fv, &perf, algorithm, budget, &training_instances, &enumerate_grid(), &opts)
            .map_err(py_err)?;
        Ok(PyModel {
            manifest: Manifest::new(model, algorithm, budget, &training_instances),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyModel {
            manifest: load_manifest(path).map_err(py_err)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_manifest(path, &self.manifest).map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.manifest.to_json().map_err(py_err)
    }

    #[getter]
    fn classes(&self) -> Vec<u32> {
        self.manifest.model.classes()
    }

    #[getter]
    fn algorithm(&self) -> String {
        self.manifest.algorithm.clone()
    }

    #[getter]
    fn budget(&self) -> u64 {
        self.manifest.budget
    }

    /// Ensemble members of one class as `(config, q, weight)` tuples.
    fn members(&self, class_id: u32) -> PyResult<Vec<(String, f64, f64)>> {
        let c = self
            .manifest
            .classes
            .iter()
            .find(|c| c.class_id == class_id)
            .ok_or_else(|| PyValueError::new_err(format!("class {class_id} is not in the model")))?;
        Ok(c.members.iter().map(|m| (m.config.clone(), m.q, m.weight)).collect())
    }

    /// Returns `(prediction, predicted_class)`; the prediction is on the transformed scale.
    fn predict(&self, features: Vec<f64>) -> PyResult<(f64, u32)> {
        let fv = FeatureVector::new(0, 0, features).map_err(py_err)?;
        personalize::predict(&self.manifest.model, &fv).map_err(py_err)
    }

    fn predict_for_class(&self, features: Vec<f64>, class_id: u32) -> PyResult<f64> {
        let fv = FeatureVector::new(0, 0, features).map_err(py_err)?;
        personalize::predict_with_known_class(&self.manifest.model, &fv, class_id).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(algorithm={:?}, budget={}, classes={})",
            self.manifest.algorithm,
            self.manifest.budget,
            self.manifest.classes.len()
        )
    }
}

/// Cross-validates on the two tables and returns the scenario report as JSON.
#[pyfunction]
#[pyo3(signature = (features, performance, algorithm, budget, folds = 5, target = "log", seed = 0, best_test = true))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    py: Python<'_>,
    features: &str,
    performance: &str,
    algorithm: &str,
    budget: u64,
    folds: usize,
    target: &str,
    seed: u64,
    best_test: bool,
) -> PyResult<String> {
    let fv = load_feature_table(features).map_err(py_err)?;
    let perf = load_performance_table(performance).map_err(py_err)?;
    let opts = EvalOptions {
        folds,
        seed,
        train: TrainOptions {
            target_transform: parse_transform(target)?,
            seed,
            ..TrainOptions::default()
        },
        best_test,
        algorithm: algorithm.to_string(),
        budget,
        ..EvalOptions::default()
    };
    let res = py
        .detach(|| run_evaluation_tables(&fv, &perf, &enumerate_grid(), &opts))
        .map_err(py_err)?;
    res.report.to_json().map_err(py_err)
}

#[pymodule]
fn ppr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("N_FEATURES", ela::N_FEATURES)?;
    m.add_function(wrap_pyfunction!(config_grid, m)?)?;
    m.add_function(wrap_pyfunction!(compute_weights, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(compute_features, m)?)?;
    m.add_function(wrap_pyfunction!(instance_features, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_class::<PyModel>()?;
    Ok(())
}

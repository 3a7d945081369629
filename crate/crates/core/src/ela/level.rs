//! Level-set features: how well simple classifiers separate the best
//! `q`-fraction of the sample from the rest, under seeded stratified
//! 5-fold cross-validation.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

use super::stats::{quantile_count, rank_by_fitness};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};
use crate::suite::DesignSet;
use crate::trees::{ClassTreeOptions, ClassificationTree, SplitMeasure};

const GROUP: &str = "ela_level";
pub const CV_FOLDS: usize = 5;

/// Labels the best `ceil(q n)` points (by fitness, then index) as class 1.
pub fn level_labels(fitness: &[f64], q: f64) -> Vec<u32> {
    let k = quantile_count(q, fitness.len());
    let mut labels = vec![0u32; fitness.len()];
    for &i in &rank_by_fitness(fitness)[..k.min(fitness.len())] {
        labels[i] = 1;
    }
    labels
}

/// Seeded stratified fold assignment: each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[u32], k: usize, seed: u64) -> Vec<usize> {
    let mut fold = vec![0; labels.len()];
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng_from(&[0xF01D, seed, c as u64]));
        for (j, i) in idx.into_iter().enumerate() {
            fold[i] = j % k;
        }
    }
    fold
}

/// Gaussian discriminant analysis, shared or per-class covariance.
pub struct Discriminant {
    classes: Vec<(u32, DVector<f64>, DMatrix<f64>, f64)>,
}

impl Discriminant {
    /// `quadratic = false` gives LDA (pooled covariance), `true` gives QDA.
    pub fn fit(x: &[Vec<f64>], labels: &[u32], quadratic: bool) -> Self {
        let d = x[0].len();
        let n = x.len();
        let mut present: Vec<u32> = labels.to_vec();
        present.sort_unstable();
        present.dedup();
        let stats: Vec<(u32, DVector<f64>, DMatrix<f64>, usize)> = present
            .iter()
            .map(|&c| {
                let rows: Vec<&Vec<f64>> = x.iter().zip(labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
                let mut mu = DVector::zeros(d);
                for r in &rows {
                    mu += DVector::from_column_slice(r);
                }
                mu /= rows.len() as f64;
                let mut scatter = DMatrix::zeros(d, d);
                for r in &rows {
                    let v = DVector::from_column_slice(r) - &mu;
                    scatter += &v * v.transpose();
                }
                (c, mu, scatter, rows.len())
            })
            .collect();
        let mut pooled = DMatrix::zeros(d, d);
        for s in &stats {
            pooled += &s.2;
        }
        let dof = n.saturating_sub(stats.len()).max(1) as f64;
        pooled /= dof;
        // ridge scaled to the data keeps single-point classes invertible
        let ridge = 1e-6 * (pooled.trace() / d as f64).max(1e-12);
        let classes = stats
            .into_iter()
            .map(|(c, mu, scatter, cnt)| {
                let mut cov = if quadratic {
                    scatter / (cnt.saturating_sub(1).max(1) as f64)
                } else {
                    pooled.clone()
                };
                for i in 0..d {
                    cov[(i, i)] += ridge;
                }
                let prior = (cnt as f64 / n as f64).ln();
                (c, mu, cov, prior)
            })
            .map(|(c, mu, cov, prior)| {
                let chol = cov.clone().cholesky().expect("ridge makes covariance positive definite");
                let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                let inv = chol.inverse();
                (c, mu, inv, prior - 0.5 * logdet)
            })
            .collect();
        Discriminant { classes }
    }

    pub fn predict(&self, x: &[f64]) -> u32 {
        let v = DVector::from_column_slice(x);
        let mut best = (f64::NEG_INFINITY, 0u32);
        for (c, mu, inv, offset) in &self.classes {
            let diff = &v - mu;
            let score = offset - 0.5 * (diff.transpose() * inv * &diff)[(0, 0)];
            if score > best.0 {
                best = (score, *c);
            }
        }
        best.1
    }
}

fn depth2_tree(x: &[Vec<f64>], labels: &[u32]) -> ClassificationTree {
    ClassificationTree::fit(
        x,
        labels,
        ClassTreeOptions {
            measure: SplitMeasure::Gini,
            minsplit: 2,
            max_depth: Some(2),
            max_features: None,
        },
    )
    .expect("non-empty training fold")
}

/// Cross-validated misclassification rates `[lda, qda, tree]`.
pub fn cv_mmce(x: &[Vec<f64>], labels: &[u32], seed: u64) -> [f64; 3] {
    let folds = stratified_folds(labels, CV_FOLDS, seed);
    let mut wrong = [0usize; 3];
    for k in 0..CV_FOLDS {
        let (mut tx, mut ty) = (Vec::new(), Vec::new());
        for i in 0..x.len() {
            if folds[i] != k {
                tx.push(x[i].clone());
                ty.push(labels[i]);
            }
        }
        if tx.is_empty() {
            continue;
        }
        let lda = Discriminant::fit(&tx, &ty, false);
        let qda = Discriminant::fit(&tx, &ty, true);
        let tree = depth2_tree(&tx, &ty);
        for i in (0..x.len()).filter(|&i| folds[i] == k) {
            let preds = [lda.predict(&x[i]), qda.predict(&x[i]), tree.predict(&x[i])];
            for (w, p) in wrong.iter_mut().zip(preds) {
                if p != labels[i] {
                    *w += 1;
                }
            }
        }
    }
    wrong.map(|w| w as f64 / x.len() as f64)
}

/// `a / b`, equal errors give 1, a zero denominator is floored at half an error.
pub fn mmce_ratio(a: f64, b: f64, n: usize) -> f64 {
    if a == b {
        1.0
    } else {
        a / b.max(0.5 / n as f64)
    }
}

/// 21 values: per quantile the three mmce values, then per quantile the
/// ratios `lda/qda, lda/tree, qda/tree`, then the per-quantile mean mmce.
pub fn ela_level_group(ds: &DesignSet, quantiles: &[f64], seed: u64) -> Result<Vec<f64>> {
    let n = ds.len();
    let mut mmce = Vec::new();
    for (qi, &q) in quantiles.iter().enumerate() {
        let labels = level_labels(&ds.fitness, q);
        let ones = labels.iter().filter(|&&l| l == 1).count();
        if ones == 0 || ones == n {
            return Err(Error::degenerate(
                GROUP,
                format!("quantile {q} of {n} points leaves a single label"),
            ));
        }
        mmce.push(cv_mmce(&ds.points, &labels, derive_seed(&[seed, qi as u64])));
    }
    let mut out: Vec<f64> = mmce.iter().flatten().copied().collect();
    for m in &mmce {
        out.extend([
            mmce_ratio(m[0], m[1], n),
            mmce_ratio(m[0], m[2], n),
            mmce_ratio(m[1], m[2], n),
        ]);
    }
    out.extend(mmce.iter().map(|m| m.iter().sum::<f64>() / 3.0));
    Ok(out)
}

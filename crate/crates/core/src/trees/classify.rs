//! Classification trees and the majority-vote classifier ensemble that maps
//! a feature vector to a problem class.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cart::{check_xy, SPLIT_TOLERANCE};
use super::config::Technique;
use super::forest::sqrt_features;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMeasure {
    Gini,
    Entropy,
}

impl SplitMeasure {
    pub fn name(self) -> &'static str {
        match self {
            SplitMeasure::Gini => "gini",
            SplitMeasure::Entropy => "entropy",
        }
    }

    /// Impurity of a node with the given class counts, times the node size.
    fn weighted(self, counts: &[usize], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let nf = n as f64;
        match self {
            SplitMeasure::Gini => nf - counts.iter().map(|&c| (c * c) as f64).sum::<f64>() / nf,
            SplitMeasure::Entropy => counts
                .iter()
                .filter(|&&c| c > 0)
                .map(|&c| {
                    let p = c as f64 / nf;
                    -(c as f64) * p.ln()
                })
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassNode {
    Leaf {
        label: u32,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationTree {
    pub n_features: usize,
    pub nodes: Vec<ClassNode>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassTreeOptions {
    pub measure: SplitMeasure,
    pub minsplit: usize,
    pub max_depth: Option<usize>,
    pub max_features: Option<usize>,
}

impl ClassificationTree {
    pub fn fit(x: &[Vec<f64>], labels: &[u32], opts: ClassTreeOptions) -> Result<Self> {
        check_xy_labels(x, labels)?;
        let rows: Vec<usize> = (0..x.len()).collect();
        Ok(Self::grow(x, labels, &rows, opts, None))
    }

    fn grow(
        x: &[Vec<f64>],
        labels: &[u32],
        rows: &[usize],
        opts: ClassTreeOptions,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Self {
        let classes: Vec<u32> = {
            let mut c: Vec<u32> = rows.iter().map(|&r| labels[r]).collect();
            c.sort_unstable();
            c.dedup();
            c
        };
        let class_of: Vec<usize> = labels
            .iter()
            .map(|l| classes.binary_search(l).unwrap_or(usize::MAX))
            .collect();
        let mut b = ClassBuilder {
            x,
            class_of: &class_of,
            classes: &classes,
            opts,
            rng,
            nodes: Vec::new(),
        };
        b.grow(rows.to_vec(), 0);
        ClassificationTree {
            n_features: x[0].len(),
            nodes: b.nodes,
        }
    }

    pub fn predict(&self, x: &[f64]) -> u32 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                ClassNode::Leaf { label } => return label,
                ClassNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

fn check_xy_labels(x: &[Vec<f64>], labels: &[u32]) -> Result<usize> {
    let dummy = vec![0.0; labels.len()];
    check_xy(x, &dummy)
}

struct ClassBuilder<'a, 'r> {
    x: &'a [Vec<f64>],
    class_of: &'a [usize],
    classes: &'a [u32],
    opts: ClassTreeOptions,
    rng: Option<&'r mut ChaCha8Rng>,
    nodes: Vec<ClassNode>,
}

impl ClassBuilder<'_, '_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.classes.len()];
        for &r in rows {
            c[self.class_of[r]] += 1;
        }
        c
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        // argmax keeps the first maximum, i.e. the smallest label
        let majority = counts
            .iter()
            .enumerate()
            .fold((0, 0), |best, (i, &c)| if c > best.1 { (i, c) } else { best })
            .0;
        let at = self.nodes.len();
        self.nodes.push(ClassNode::Leaf {
            label: self.classes[majority],
        });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.opts.max_depth.is_some_and(|d| depth >= d);
        if rows.len() < self.opts.minsplit || pure || depth_capped {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(&rows, &counts) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = ClassNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<(usize, f64)> {
        let p = self.x[0].len();
        let x = self.x;
        let varies = |f: usize| rows.iter().any(|&r| x[r][f] != x[rows[0]][f]);
        let features: Vec<usize> = match (self.opts.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(rng);
                let mut f: Vec<usize> = perm.into_iter().filter(|&f| varies(f)).take(m).collect();
                f.sort_unstable();
                f
            }
            _ => (0..p).filter(|&f| varies(f)).collect(),
        };
        let m = rows.len();
        let measure = self.opts.measure;
        let tol = SPLIT_TOLERANCE * measure.weighted(counts, m);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = rows.to_vec();
        for f in features {
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0usize; counts.len()];
            let mut right = counts.to_vec();
            for k in 1..m {
                let c = self.class_of[order[k - 1]];
                left[c] += 1;
                right[c] -= 1;
                let (lo, hi) = (x[order[k - 1]][f], x[order[k]][f]);
                if lo == hi {
                    continue;
                }
                let score = measure.weighted(&left, k) + measure.weighted(&right, m - k);
                if best.is_none_or(|(s, _, _)| score < s - tol) {
                    let mid = lo + (hi - lo) / 2.0;
                    best = Some((score, f, if mid < hi { mid } else { lo }));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Most frequent label; ties go to the smallest label.
pub fn majority_vote(votes: &[u32]) -> Option<u32> {
    let mut tally: BTreeMap<u32, usize> = BTreeMap::new();
    for &v in votes {
        *tally.entry(v).or_default() += 1;
    }
    tally
        .into_iter()
        .fold(None, |best: Option<(u32, usize)>, (label, n)| match best {
            Some((_, bn)) if bn >= n => best,
            _ => Some((label, n)),
        })
        .map(|(label, _)| label)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub technique: Technique,
    pub split_measure: SplitMeasure,
    pub minsplit: usize,
    pub nest: usize,
}

impl fmt::Display for ClassifierConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_crit-{}_minsplit-{}_nest-{}",
            self.technique.name(),
            self.split_measure.name(),
            self.minsplit,
            self.nest
        )
    }
}

impl ClassifierConfig {
    /// The three voting members used by default.
    pub fn default_members() -> [ClassifierConfig; 3] {
        let member = |technique, split_measure| ClassifierConfig {
            technique,
            split_measure,
            minsplit: 2,
            nest: 9,
        };
        [
            member(Technique::BaggingDT, SplitMeasure::Entropy),
            member(Technique::RandomForest, SplitMeasure::Entropy),
            member(Technique::RandomForest, SplitMeasure::Gini),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierMember {
    pub config: ClassifierConfig,
    pub seed: u64,
    pub trees: Vec<ClassificationTree>,
}

impl ClassifierMember {
    pub fn predict(&self, x: &[f64]) -> u32 {
        let votes: Vec<u32> = self.trees.iter().map(|t| t.predict(x)).collect();
        majority_vote(&votes).expect("member has at least one tree")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierEnsemble {
    pub members: Vec<ClassifierMember>,
    /// Sorted distinct labels seen in training.
    pub labels: Vec<u32>,
    pub n_features: usize,
}

pub fn fit_classifier_ensemble(x: &[Vec<f64>], labels: &[u32], seed: u64) -> Result<ClassifierEnsemble> {
    fit_classifier_ensemble_with(x, labels, &ClassifierConfig::default_members(), seed)
}

pub fn fit_classifier_ensemble_with(
    x: &[Vec<f64>],
    labels: &[u32],
    configs: &[ClassifierConfig],
    seed: u64,
) -> Result<ClassifierEnsemble> {
    let p = check_xy_labels(x, labels)?;
    let mut distinct = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::contract("classifier needs at least two distinct labels"));
    }
    if configs.is_empty() || configs.iter().any(|c| c.nest == 0) {
        return Err(Error::contract("classifier members need nest >= 1"));
    }
    let n = x.len();
    let members = configs
        .iter()
        .enumerate()
        .map(|(i, cfg)| {
            let member_seed = derive_seed(&[seed, 0xC1A5, i as u64]);
            let opts = ClassTreeOptions {
                measure: cfg.split_measure,
                minsplit: cfg.minsplit,
                max_depth: None,
                max_features: matches!(cfg.technique, Technique::RandomForest).then(|| sqrt_features(p)),
            };
            let trees = (0..cfg.nest)
                .map(|t| {
                    let mut rng = rng_from(&[member_seed, t as u64]);
                    let rows: Vec<usize> = if matches!(cfg.technique, Technique::DecisionTree) {
                        (0..n).collect()
                    } else {
                        (0..n).map(|_| rng.random_range(0..n)).collect()
                    };
                    ClassificationTree::grow(x, labels, &rows, opts, Some(&mut rng))
                })
                .collect();
            ClassifierMember {
                config: *cfg,
                seed: member_seed,
                trees,
            }
        })
        .collect();
    Ok(ClassifierEnsemble {
        members,
        labels: distinct,
        n_features: p,
    })
}

impl ClassifierEnsemble {
    pub fn member_votes(&self, x: &[f64]) -> Vec<u32> {
        self.members.iter().map(|m| m.predict(x)).collect()
    }

    pub fn predict_class(&self, x: &[f64]) -> Result<u32> {
        if x.len() != self.n_features {
            return Err(Error::contract(format!(
                "query has {} features, classifier expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(majority_vote(&self.member_votes(x)).expect("ensemble has members"))
    }
}

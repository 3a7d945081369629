//! Desk-scale performance data: simple optimizers run on the built-in suite,
//! and the matching feature table.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tables::PerformanceRecord;
use crate::ela::{compute_features, FeatureConfig, FeatureVector};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};
use crate::suite::{instantiate, uniform_sample, ProblemInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Optimizer {
    RandomSearch,
    OnePlusOneEs,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::RandomSearch => "random-search",
            Optimizer::OnePlusOneEs => "(1+1)-ES",
        }
    }
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-search" => Ok(Optimizer::RandomSearch),
            "(1+1)-ES" | "1+1-es" | "one-plus-one-es" => Ok(Optimizer::OnePlusOneEs),
            _ => Err(Error::data(format!("unknown optimizer `{s}`"))),
        }
    }
}

/// Which problems and instances of the built-in suite to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub dim: usize,
    pub problems: Vec<u32>,
    pub instances: Vec<u32>,
}

impl SuiteConfig {
    /// All 24 functions, instances 1..=5.
    pub fn full(dim: usize) -> Self {
        SuiteConfig {
            dim,
            problems: (1..=24).collect(),
            instances: (1..=5).collect(),
        }
    }

    pub fn instances(&self) -> Result<Vec<ProblemInstance>> {
        let mut out = Vec::with_capacity(self.problems.len() * self.instances.len());
        for &p in &self.problems {
            for &i in &self.instances {
                out.push(instantiate(p, i, self.dim)?);
            }
        }
        Ok(out)
    }
}

/// Best-so-far precision at every checkpoint of one run.
fn run(inst: &ProblemInstance, optimizer: Optimizer, budgets: &[u64], seed: u64) -> Result<Vec<f64>> {
    let max_budget = *budgets.iter().max().unwrap();
    let mut rng = rng_from(&[0x0F7, seed, inst.function_id as u64, inst.instance_id as u64]);
    let (lo, hi) = (inst.lower, inst.upper);
    let d = inst.dim;
    let uniform = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..d).map(|_| rng.random_range(lo..=hi)).collect()
    };
    let mut best = f64::INFINITY;
    let mut trace = Vec::with_capacity(max_budget as usize);
    match optimizer {
        Optimizer::RandomSearch => {
            for _ in 0..max_budget {
                best = best.min(inst.evaluate(&uniform(&mut rng))?);
                trace.push(best);
            }
        }
        Optimizer::OnePlusOneEs => {
            let mut parent = uniform(&mut rng);
            let mut f_parent = inst.evaluate(&parent)?;
            best = f_parent;
            trace.push(best);
            let mut sigma = 0.2 * (hi - lo);
            let (up, down) = ((1.0f64 / 3.0).exp(), (-1.0f64 / 12.0).exp());
            while (trace.len() as u64) < max_budget {
                let child: Vec<f64> = parent
                    .iter()
                    .map(|&x| {
                        let z: f64 = rng.sample(StandardNormal);
                        (x + sigma * z).clamp(lo, hi)
                    })
                    .collect();
                let f_child = inst.evaluate(&child)?;
                if f_child <= f_parent {
                    parent = child;
                    f_parent = f_child;
                    sigma *= up;
                } else {
                    sigma *= down;
                }
                sigma = sigma.clamp(1e-12, hi - lo);
                best = best.min(f_child);
                trace.push(best);
            }
        }
    }
    let opt = inst.optimum_value();
    Ok(budgets
        .iter()
        .map(|&b| (trace[b as usize - 1] - opt).max(0.0))
        .collect())
}

/// One run per (problem, instance); precision recorded at every budget.
pub fn generate_performance(
    suite: &SuiteConfig,
    optimizer: Optimizer,
    budgets: &[u64],
    seed: u64,
) -> Result<Vec<PerformanceRecord>> {
    if budgets.is_empty() || budgets.contains(&0) {
        return Err(Error::contract("budgets must be nonempty and positive"));
    }
    let mut budgets = budgets.to_vec();
    budgets.sort_unstable();
    budgets.dedup();
    let instances = suite.instances()?;
    let runs = instances
        .par_iter()
        .map(|inst| run(inst, optimizer, &budgets, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(runs.len() * budgets.len());
    for (inst, precisions) in instances.iter().zip(runs) {
        for (&budget, target_precision) in budgets.iter().zip(precisions) {
            out.push(PerformanceRecord {
                algorithm: optimizer.name().to_string(),
                problem_id: inst.function_id,
                instance_id: inst.instance_id,
                budget,
                target_precision,
            });
        }
    }
    Ok(out)
}

/// Samples every suite instance and computes its feature vector. The sample
/// and the feature randomness of each instance get their own derived seed.
pub fn compute_feature_table(suite: &SuiteConfig, cfg: &FeatureConfig) -> Result<Vec<FeatureVector>> {
    cfg.validate()?;
    let instances = suite.instances()?;
    instances
        .par_iter()
        .map(|inst| {
            let s = derive_seed(&[cfg.seed, inst.function_id as u64, inst.instance_id as u64]);
            let ds = uniform_sample(inst, cfg.budget_multiplier, s)?;
            let local = FeatureConfig { seed: s, ..cfg.clone() };
            compute_features(&ds, &local)
        })
        .collect()
}

//! The 56-entry landscape feature vector: dispersion (16), meta-model (9),
//! level-set (21), information content (5) and nearest-better clustering (5).
//! Values are emitted raw, without normalization.

mod disp;
mod ic;
mod level;
mod meta;
mod nbc;
mod stats;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::suite::DesignSet;

pub use disp::disp_group;
pub use ic::{
    block_entropy, default_epsilons, ic_group, nearest_neighbour_tour, partial_information,
    symbolize,
};
pub use level::{cv_mmce, ela_level_group, level_labels, mmce_ratio, stratified_folds, Discriminant};
pub use meta::ela_meta_group;
pub use nbc::{nbc_group, nearest_better, NearestBetter};

pub const N_FEATURES: usize = 56;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Disp,
    ElaMeta,
    ElaLevel,
    Ic,
    Nbc,
}

impl FeatureGroup {
    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Disp => "disp",
            FeatureGroup::ElaMeta => "ela_meta",
            FeatureGroup::ElaLevel => "ela_level",
            FeatureGroup::Ic => "ic",
            FeatureGroup::Nbc => "nbc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub budget_multiplier: usize,
    pub disp_quantiles: Vec<f64>,
    pub level_quantiles: Vec<f64>,
    pub ic_epsilons: Vec<f64>,
    pub seed: u64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            budget_multiplier: 400,
            disp_quantiles: vec![0.02, 0.05, 0.10, 0.25],
            level_quantiles: vec![0.10, 0.25, 0.50],
            ic_epsilons: default_epsilons(),
            seed: 0,
        }
    }
}

impl FeatureConfig {
    pub fn with_multiplier(budget_multiplier: usize, seed: u64) -> Self {
        FeatureConfig {
            budget_multiplier,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let increasing = |qs: &[f64]| qs.iter().all(|q| *q > 0.0 && *q < 1.0) && qs.windows(2).all(|w| w[0] < w[1]);
        if self.disp_quantiles.len() != 4 || !increasing(&self.disp_quantiles) {
            return Err(Error::contract("disp quantiles: four increasing fractions in (0, 1)"));
        }
        if self.level_quantiles.len() != 3 || !increasing(&self.level_quantiles) {
            return Err(Error::contract("level quantiles: three increasing fractions in (0, 1)"));
        }
        if self.ic_epsilons.is_empty()
            || self.ic_epsilons[0] < 0.0
            || !self.ic_epsilons.windows(2).all(|w| w[0] < w[1])
        {
            return Err(Error::contract("ic epsilons: nonnegative and strictly increasing"));
        }
        Ok(())
    }
}

/// Canonical feature names in emission order.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = Vec::with_capacity(N_FEATURES);
        for q in ["02", "05", "10", "25"] {
            for stat in ["ratio_mean", "ratio_median", "diff_mean", "diff_median"] {
                names.push(format!("disp.{stat}_{q}"));
            }
        }
        for n in [
            "lin_simple.adj_r2",
            "lin_simple.intercept",
            "lin_simple.coef.min",
            "lin_simple.coef.max",
            "lin_simple.coef.max_by_min",
            "lin_w_interact.adj_r2",
            "quad_simple.adj_r2",
            "quad_simple.cond",
            "quad_w_interact.adj_r2",
        ] {
            names.push(format!("ela_meta.{n}"));
        }
        let qs = ["10", "25", "50"];
        for q in qs {
            for m in ["lda", "qda", "tree"] {
                names.push(format!("ela_level.mmce_{m}_{q}"));
            }
        }
        for q in qs {
            for r in ["lda_qda", "lda_tree", "qda_tree"] {
                names.push(format!("ela_level.{r}_{q}"));
            }
        }
        for q in qs {
            names.push(format!("ela_level.mmce_mean_{q}"));
        }
        for n in ["h_max", "eps_s", "eps_max", "eps_ratio", "m0"] {
            names.push(format!("ic.{n}"));
        }
        for n in [
            "nn_nb.sd_ratio",
            "nn_nb.mean_ratio",
            "nn_nb.cor",
            "dist_ratio.coeff_var",
            "nb_fitness.cor",
        ] {
            names.push(format!("nbc.{n}"));
        }
        names
    })
}

pub fn feature_group(index: usize) -> FeatureGroup {
    match index {
        0..16 => FeatureGroup::Disp,
        16..25 => FeatureGroup::ElaMeta,
        25..46 => FeatureGroup::ElaLevel,
        46..51 => FeatureGroup::Ic,
        _ => FeatureGroup::Nbc,
    }
}

/// The feature representation of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub problem_id: u32,
    pub instance_id: u32,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(problem_id: u32, instance_id: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != N_FEATURES {
            return Err(Error::contract(format!(
                "feature vector has {} entries, expected {N_FEATURES}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "feature {} of ({problem_id}, {instance_id}) is not finite",
                feature_names()[i]
            )));
        }
        Ok(FeatureVector {
            problem_id,
            instance_id,
            values,
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names()
            .iter()
            .position(|n| n == name)
            .map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        feature_names()
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().copied())
    }
}

pub fn compute_features(ds: &DesignSet, cfg: &FeatureConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let mut values = Vec::with_capacity(N_FEATURES);
    values.extend(disp_group(ds, &cfg.disp_quantiles)?);
    values.extend(ela_meta_group(ds)?);
    values.extend(ela_level_group(ds, &cfg.level_quantiles, cfg.seed)?);
    values.extend(ic_group(ds, &cfg.ic_epsilons, cfg.seed));
    values.extend(nbc_group(ds)?);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::degenerate(
            feature_group(i).name(),
            format!("{} is not finite", feature_names()[i]),
        ));
    }
    FeatureVector::new(ds.problem_id, ds.instance_id, values)
}

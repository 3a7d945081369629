use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::personalize::PersonalizedModel;
use crate::target::TargetTransform;

pub const MANIFEST_FORMAT: &str = "ppr-manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub config: String,
    pub q: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class_id: u32,
    pub members: Vec<MemberSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub config: String,
    pub seed: u64,
}

/// Human-readable header plus the full serialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub algorithm: String,
    pub budget: u64,
    pub training_instances: Vec<u32>,
    pub seed: u64,
    pub target_transform: TargetTransform,
    pub classes: Vec<ClassSummary>,
    pub classifier: Vec<ClassifierSummary>,
    pub model: PersonalizedModel,
}

impl Manifest {
    pub fn new(model: PersonalizedModel, algorithm: &str, budget: u64, training_instances: &[u32]) -> Self {
        let classes = model
            .ensembles
            .values()
            .map(|e| ClassSummary {
                class_id: e.class_id,
                members: e
                    .members
                    .iter()
                    .map(|m| MemberSummary {
                        config: m.config.canonical_name(),
                        q: m.q,
                        weight: m.weight,
                    })
                    .collect(),
            })
            .collect();
        let classifier = model
            .classifier
            .members
            .iter()
            .map(|m| ClassifierSummary {
                config: m.config.to_string(),
                seed: m.seed,
            })
            .collect();
        Manifest {
            format: MANIFEST_FORMAT.to_string(),
            algorithm: algorithm.to_string(),
            budget,
            training_instances: training_instances.to_vec(),
            seed: model.seed,
            target_transform: model.target_transform,
            classes,
            classifier,
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::data(format!("unsupported manifest format `{}`", m.format)));
        }
        let rebuilt = Manifest::new(m.model.clone(), &m.algorithm, m.budget, &m.training_instances);
        if rebuilt != m {
            return Err(Error::data("manifest summary does not match the embedded model"));
        }
        Ok(m)
    }
}

pub fn save_manifest(path: impl AsRef<Path>, manifest: &Manifest) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, manifest.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Manifest::from_json(&text)
}

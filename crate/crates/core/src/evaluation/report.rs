use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{mean, median};
use crate::error::{Error, Result};
use crate::io::MemberSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "Best-test")]
    BestTest,
    #[serde(rename = "Best-train")]
    BestTrain,
    #[serde(rename = "Best-train-instance")]
    BestTrainInstance,
    #[serde(rename = "Ensemble-ground")]
    EnsembleGround,
    #[serde(rename = "Ensemble-class")]
    EnsembleClass,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::BestTest,
        Scenario::BestTrain,
        Scenario::BestTrainInstance,
        Scenario::EnsembleGround,
        Scenario::EnsembleClass,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BestTest => "Best-test",
            Scenario::BestTrain => "Best-train",
            Scenario::BestTrainInstance => "Best-train-instance",
            Scenario::EnsembleGround => "Ensemble-ground",
            Scenario::EnsembleClass => "Ensemble-class",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase();
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::data(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCell {
    /// Absolute errors in fold order.
    pub errors: Vec<f64>,
    pub median_ae: f64,
    pub mean_ae: f64,
}

impl ScenarioCell {
    pub fn from_errors(errors: Vec<f64>) -> Result<Self> {
        Ok(ScenarioCell {
            median_ae: median(&errors)?,
            mean_ae: mean(&errors)?,
            errors,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub algorithm: String,
    pub budget: u64,
    pub sample_multiplier: Option<usize>,
    pub dim: Option<usize>,
    pub target_transform: String,
    pub seed: u64,
    pub fold_seeds: Vec<u64>,
    pub class_source: String,
    pub weighting: String,
    pub n_configs: usize,
    /// Config chosen on pooled test residuals, when enabled.
    pub best_test: Option<String>,
    pub best_test_aggregation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub seed: u64,
    pub test_instances: Vec<u32>,
    pub best_train: String,
    pub best_train_instance: BTreeMap<u32, String>,
    pub ensembles: BTreeMap<u32, Vec<MemberSummary>>,
    pub classifier_correct: usize,
    pub classifier_total: usize,
    /// Held-out target reads before the fold's predictions were sealed.
    pub early_target_reads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub metadata: ReportMetadata,
    pub problems: BTreeMap<u32, BTreeMap<Scenario, ScenarioCell>>,
    pub folds: Vec<FoldSummary>,
}

impl ScenarioReport {
    pub fn medians(&self, scenario: Scenario) -> Result<BTreeMap<u32, f64>> {
        self.column(scenario, |c| c.median_ae)
    }

    pub fn means(&self, scenario: Scenario) -> Result<BTreeMap<u32, f64>> {
        self.column(scenario, |c| c.mean_ae)
    }

    fn column(&self, scenario: Scenario, f: impl Fn(&ScenarioCell) -> f64) -> Result<BTreeMap<u32, f64>> {
        self.problems
            .iter()
            .map(|(&p, cells)| {
                let cell = cells.get(&scenario).ok_or_else(|| {
                    Error::data(format!("scenario {} missing for problem {p}", scenario.name()))
                })?;
                Ok((p, f(cell)))
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Problem-by-scenario medians with win markers on the ensemble columns:
    /// `+` beats Best-train, `*` beats Best-test, `#` beats both.
    pub fn render_table(&self, confusion: Option<&ConfusionMatrix>) -> String {
        let present: Vec<Scenario> = Scenario::ALL
            .into_iter()
            .filter(|s| self.problems.values().all(|c| c.contains_key(s)))
            .collect();
        let mut out = String::new();
        let m = &self.metadata;
        let _ = writeln!(
            out,
            "algorithm {} | budget {} | target {} | seed {} | configs {}",
            m.algorithm, m.budget, m.target_transform, m.seed, m.n_configs
        );
        let _ = write!(out, "{:>7}", "problem");
        for s in &present {
            let _ = write!(out, " {:>21}", s.name());
        }
        out.push('\n');
        for (p, cells) in &self.problems {
            let _ = write!(out, "{p:>7}");
            for s in &present {
                let v = cells[s].median_ae;
                let marker = if matches!(s, Scenario::EnsembleGround | Scenario::EnsembleClass) {
                    let beats = |o: Scenario| cells.get(&o).is_some_and(|c| v < c.median_ae);
                    match (beats(Scenario::BestTrain), beats(Scenario::BestTest)) {
                        (true, true) => "#",
                        (true, false) => "+",
                        (false, true) => "*",
                        _ => " ",
                    }
                } else {
                    " "
                };
                let _ = write!(out, " {v:>20.4}{marker}");
            }
            out.push('\n');
        }
        let n = self.problems.len();
        for ens in [Scenario::EnsembleGround, Scenario::EnsembleClass] {
            for base in [Scenario::BestTrain, Scenario::BestTest] {
                if !present.contains(&ens) || !present.contains(&base) {
                    continue;
                }
                let med = win_count(self, ens, base, false).unwrap_or(0);
                let avg = win_count(self, ens, base, true).unwrap_or(0);
                let _ = writeln!(
                    out,
                    "{} better than {}: {med}/{n} by median, {avg}/{n} by mean",
                    ens.name(),
                    base.name()
                );
            }
        }
        if let Some(cm) = confusion {
            let _ = writeln!(
                out,
                "classifier: {}/{} correct ({:.4})",
                cm.trace(),
                cm.total(),
                cm.accuracy()
            );
        }
        out
    }
}

/// Problems where scenario `a` has a strictly smaller median (or mean) than `b`.
pub fn win_count(report: &ScenarioReport, a: Scenario, b: Scenario, use_mean: bool) -> Result<usize> {
    let (xa, xb) = if use_mean {
        (report.means(a)?, report.means(b)?)
    } else {
        (report.medians(a)?, report.medians(b)?)
    };
    Ok(xa.iter().filter(|(p, v)| **v < xb[p]).count())
}

/// Per problem, `b - a`: positive where `a` has the smaller error.
pub fn relative_advantage(a: &BTreeMap<u32, f64>, b: &BTreeMap<u32, f64>) -> Result<BTreeMap<u32, f64>> {
    if a.len() != b.len() || a.keys().ne(b.keys()) {
        return Err(Error::contract("relative_advantage needs identical problem sets"));
    }
    Ok(a.iter().map(|(p, va)| (*p, b[p] - va)).collect())
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(mut labels: Vec<u32>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, truth: u32, predicted: u32) -> Result<()> {
        let idx = |l: u32| {
            self.labels
                .binary_search(&l)
                .map_err(|_| Error::Internal(format!("label {l} outside the confusion matrix")))
        };
        let (i, j) = (idx(truth)?, idx(predicted)?);
        self.counts[i][j] += 1;
        Ok(())
    }

    pub fn trace(&self) -> u64 {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.trace() as f64 / t as f64,
        }
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Delimited table with a `true\predicted` corner cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in &self.labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            let _ = write!(out, "{l}");
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }
}

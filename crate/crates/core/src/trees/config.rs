use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    DecisionTree,
    RandomForest,
    BaggingDT,
}

impl Technique {
    pub const ALL: [Technique; 3] = [
        Technique::DecisionTree,
        Technique::RandomForest,
        Technique::BaggingDT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::DecisionTree => "DecisionTree",
            Technique::RandomForest => "RandomForest",
            Technique::BaggingDT => "BaggingDT",
        }
    }

    pub fn is_ensemble(self) -> bool {
        !matches!(self, Technique::DecisionTree)
    }

    /// Split criteria admitted by the hyperparameter grid.
    pub fn criteria(self) -> &'static [Criterion] {
        match self {
            Technique::DecisionTree => &[Criterion::Mse, Criterion::Mae, Criterion::FriedmanMse],
            _ => &[Criterion::Mse, Criterion::Mae],
        }
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::data(format!("unknown technique `{s}`")))
    }
}

/// Regression split criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Criterion {
    Mse,
    Mae,
    FriedmanMse,
}

impl Criterion {
    pub fn name(self) -> &'static str {
        match self {
            Criterion::Mse => "mse",
            Criterion::Mae => "mae",
            Criterion::FriedmanMse => "friedman_mse",
        }
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(Criterion::Mse),
            "mae" => Ok(Criterion::Mae),
            "friedman_mse" => Ok(Criterion::FriedmanMse),
            _ => Err(Error::data(format!("unknown criterion `{s}`"))),
        }
    }
}

pub const MINSPLIT_GRID: [usize; 10] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20];
pub const NEST_GRID: [usize; 10] = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100];

/// One point of the regression hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RMConfig {
    pub technique: Technique,
    pub crit: Criterion,
    pub minsplit: usize,
    /// Number of trees; `None` for a single decision tree.
    pub nest: Option<usize>,
}

impl RMConfig {
    pub fn decision_tree(crit: Criterion, minsplit: usize) -> Self {
        RMConfig {
            technique: Technique::DecisionTree,
            crit,
            minsplit,
            nest: None,
        }
    }

    pub fn forest(technique: Technique, crit: Criterion, minsplit: usize, nest: usize) -> Self {
        RMConfig {
            technique,
            crit,
            minsplit,
            nest: Some(nest),
        }
    }

    pub fn canonical_name(&self) -> String {
        self.to_string()
    }

    /// Checks the config lies on the grid.
    pub fn validate(&self) -> Result<()> {
        if !self.technique.criteria().contains(&self.crit) {
            return Err(Error::data(format!(
                "{} does not admit crit {}",
                self.technique.name(),
                self.crit.name()
            )));
        }
        if !MINSPLIT_GRID.contains(&self.minsplit) {
            return Err(Error::data(format!("minsplit {} is off-grid", self.minsplit)));
        }
        match (self.technique.is_ensemble(), self.nest) {
            (false, None) => Ok(()),
            (true, Some(n)) if NEST_GRID.contains(&n) => Ok(()),
            (true, Some(n)) => Err(Error::data(format!("nest {n} is off-grid"))),
            (true, None) => Err(Error::data("ensemble technique without nest")),
            (false, Some(_)) => Err(Error::data("DecisionTree takes no nest")),
        }
    }
}

impl fmt::Display for RMConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}_crit-{}_minsplit-{}",
            self.technique.name(),
            self.crit.name(),
            self.minsplit
        )?;
        if let Some(n) = self.nest {
            write!(f, "_nest-{n}")?;
        }
        Ok(())
    }
}

impl FromStr for RMConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::data(format!("malformed model name `{s}`"));
        let mut parts = s.split('_');
        let technique: Technique = parts.next().ok_or_else(bad)?.parse()?;
        // `friedman_mse` contains the separator, so rejoin until the minsplit field
        let mut crit = parts.next().and_then(|p| p.strip_prefix("crit-")).ok_or_else(bad)?.to_string();
        let mut next = parts.next().ok_or_else(bad)?;
        if !next.starts_with("minsplit-") {
            crit.push('_');
            crit.push_str(next);
            next = parts.next().ok_or_else(bad)?;
        }
        let minsplit = next
            .strip_prefix("minsplit-")
            .and_then(|v| v.parse().ok())
            .ok_or_else(bad)?;
        let nest = match parts.next() {
            None => None,
            Some(p) => Some(p.strip_prefix("nest-").and_then(|v| v.parse().ok()).ok_or_else(bad)?),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        let cfg = RMConfig {
            technique,
            crit: crit.parse()?,
            minsplit,
            nest,
        };
        if cfg.technique.is_ensemble() != cfg.nest.is_some() {
            return Err(bad());
        }
        Ok(cfg)
    }
}

/// All 430 grid configurations in (technique, crit, minsplit, nest) order.
pub fn enumerate_grid() -> Vec<RMConfig> {
    let mut grid = Vec::with_capacity(430);
    for technique in Technique::ALL {
        for &crit in technique.criteria() {
            for minsplit in MINSPLIT_GRID {
                if technique.is_ensemble() {
                    grid.extend(
                        NEST_GRID
                            .iter()
                            .map(|&n| RMConfig::forest(technique, crit, minsplit, n)),
                    );
                } else {
                    grid.push(RMConfig::decision_tree(crit, minsplit));
                }
            }
        }
    }
    grid
}

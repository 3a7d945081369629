use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied before taking logarithms of a precision.
pub const LOG_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    Raw,
    NaturalLog,
}

impl TargetTransform {
    pub fn apply(self, value: f64) -> Result<f64> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::data(format!(
                "target precision must be finite and nonnegative, got {value}"
            )));
        }
        Ok(match self {
            TargetTransform::Raw => value,
            TargetTransform::NaturalLog => value.max(LOG_FLOOR).ln(),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TargetTransform::Raw => "raw",
            TargetTransform::NaturalLog => "log",
        }
    }
}

impl std::str::FromStr for TargetTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(TargetTransform::Raw),
            "log" | "ln" | "natural_log" => Ok(TargetTransform::NaturalLog),
            _ => Err(Error::data(format!("unknown target transform `{s}`"))),
        }
    }
}

pub fn transform_target(value: f64, mode: TargetTransform) -> Result<f64> {
    mode.apply(value)
}

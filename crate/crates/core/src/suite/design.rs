use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ProblemInstance;
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Sample-size multipliers (points per dimension) used by default.
pub const DEFAULT_MULTIPLIERS: [usize; 2] = [50, 400];

/// An evaluated sample `{(x, f(x))}` of one problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSet {
    pub problem_id: u32,
    pub instance_id: u32,
    pub dim: usize,
    pub seed: u64,
    /// One row per point.
    pub points: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
}

impl DesignSet {
    /// Builds a design set from raw data, checking shapes and finiteness.
    pub fn from_parts(
        problem_id: u32,
        instance_id: u32,
        points: Vec<Vec<f64>>,
        fitness: Vec<f64>,
    ) -> Result<Self> {
        if points.len() != fitness.len() {
            return Err(Error::contract(format!(
                "{} points but {} fitness values",
                points.len(),
                fitness.len()
            )));
        }
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::contract("points must share a nonzero dimension"));
        }
        if fitness.iter().chain(points.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::contract("design set holds non-finite values"));
        }
        Ok(DesignSet {
            problem_id,
            instance_id,
            dim,
            seed: 0,
            points,
            fitness,
        })
    }

    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }
}

/// Draws `budget_multiplier * dim` points uniformly over the instance bounds.
pub fn uniform_sample(
    inst: &ProblemInstance,
    budget_multiplier: usize,
    seed: u64,
) -> Result<DesignSet> {
    if budget_multiplier == 0 {
        return Err(Error::contract("budget multiplier must be positive"));
    }
    let n = budget_multiplier * inst.dim;
    let mut rng = rng_from(&[
        0xD351,
        seed,
        inst.function_id as u64,
        inst.instance_id as u64,
        inst.dim as u64,
    ]);
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..inst.dim)
                .map(|_| rng.random_range(inst.lower..=inst.upper))
                .collect()
        })
        .collect();
    let fitness = points
        .iter()
        .map(|p| inst.evaluate(p))
        .collect::<Result<Vec<_>>>()?;
    if let Some(bad) = fitness.iter().position(|v| !v.is_finite()) {
        return Err(Error::Internal(format!(
            "non-finite fitness for f{} at sample {bad}",
            inst.function_id
        )));
    }
    Ok(DesignSet {
        problem_id: inst.function_id,
        instance_id: inst.instance_id,
        dim: inst.dim,
        seed,
        points,
        fitness,
    })
}

/// Writes `problem_id,instance_id,dim,seed,x1..xd,fitness` rows.
pub fn write_design_csv<W: Write>(out: W, sets: &[DesignSet]) -> Result<()> {
    let dim = sets.first().map_or(0, |s| s.dim);
    if sets.iter().any(|s| s.dim != dim) {
        return Err(Error::contract("design sets in one file must share a dimension"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "problem_id".to_string(),
        "instance_id".into(),
        "dim".into(),
        "seed".into(),
    ];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    header.push("fitness".into());
    w.write_record(&header).map_err(csv_err)?;
    for s in sets {
        for (p, f) in s.points.iter().zip(&s.fitness) {
            let mut row = vec![
                s.problem_id.to_string(),
                s.instance_id.to_string(),
                s.dim.to_string(),
                s.seed.to_string(),
            ];
            row.extend(p.iter().map(f64::to_string));
            row.push(f.to_string());
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io("<design output>", e))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Internal(format!("csv write failed: {e}"))
}

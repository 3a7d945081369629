//! Benchmark functions, seeded problem instances, and uniform design sampling.

mod design;
mod functions;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

pub use design::{uniform_sample, write_design_csv, DesignSet, DEFAULT_MULTIPLIERS};
pub use functions::{lookup, BenchmarkFunction, CATALOG};

pub const LOWER_BOUND: f64 = -5.0;
pub const UPPER_BOUND: f64 = 5.0;
/// Optimum shifts are drawn from this narrower box so they stay strictly inside the bounds.
const SHIFT_RANGE: f64 = 4.0;

/// A benchmark function under a seeded shift and rotation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub function_id: u32,
    pub instance_id: u32,
    pub dim: usize,
    pub shift: Vec<f64>,
    pub rotation_seed: u64,
    pub lower: f64,
    pub upper: f64,
    /// Row-major `dim x dim` orthogonal matrix, or `None` for the identity.
    rotation: Option<Vec<f64>>,
}

pub fn instantiate(function_id: u32, instance_id: u32, dim: usize) -> Result<ProblemInstance> {
    let function = lookup(function_id).ok_or(Error::Catalog(function_id))?;
    if dim == 0 {
        return Err(Error::contract("dimension must be at least 1"));
    }
    let rotation_seed = derive_seed(&[function_id as u64, instance_id as u64, dim as u64]);
    if instance_id == 0 {
        return Ok(ProblemInstance {
            function_id,
            instance_id,
            dim,
            shift: vec![0.0; dim],
            rotation_seed,
            lower: LOWER_BOUND,
            upper: UPPER_BOUND,
            rotation: None,
        });
    }
    let mut rng = rng_from(&[0x5817, rotation_seed]);
    let shift = (0..dim)
        .map(|_| rng.random_range(-SHIFT_RANGE..SHIFT_RANGE))
        .collect();
    let rotation = function
        .rotated
        .then(|| random_rotation(dim, rotation_seed));
    Ok(ProblemInstance {
        function_id,
        instance_id,
        dim,
        shift,
        rotation_seed,
        lower: LOWER_BOUND,
        upper: UPPER_BOUND,
        rotation,
    })
}

/// Orthogonal matrix from Gram-Schmidt on a seeded Gaussian matrix (row-major).
pub fn random_rotation(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from(&[0x0207, seed]);
    let mut rows: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for i in 0..dim {
        // two passes of modified Gram-Schmidt keep the basis orthogonal to ~1e-15
        for _ in 0..2 {
            for j in 0..i {
                let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                let (done, cur) = rows.split_at_mut(i);
                for (c, b) in cur[0].iter_mut().zip(&done[j]) {
                    *c -= dot * b;
                }
            }
        }
        let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in rows[i].iter_mut() {
            *v /= norm;
        }
    }
    rows.into_iter().flatten().collect()
}

impl ProblemInstance {
    pub fn function(&self) -> &'static BenchmarkFunction {
        lookup(self.function_id).expect("instance built from the catalog")
    }

    pub fn rotation(&self) -> Option<&[f64]> {
        self.rotation.as_deref()
    }

    /// `f(R (x - shift))`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::contract(format!(
                "point has {} coordinates, instance dimension is {}",
                x.len(),
                self.dim
            )));
        }
        let centred: Vec<f64> = x.iter().zip(&self.shift).map(|(a, s)| a - s).collect();
        let z = match &self.rotation {
            None => centred,
            Some(r) => r
                .chunks_exact(self.dim)
                .map(|row| row.iter().zip(&centred).map(|(a, b)| a * b).sum())
                .collect(),
        };
        Ok(functions::eval_base(self.function_id, &z))
    }

    /// Objective value at the instance optimum.
    pub fn optimum_value(&self) -> f64 {
        functions::eval_base(self.function_id, &vec![0.0; self.dim])
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|v| (self.lower..=self.upper).contains(v))
    }
}

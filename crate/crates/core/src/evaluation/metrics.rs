use crate::error::{Error, Result};

fn abs_errors(preds: &[f64], truths: &[f64]) -> Result<Vec<f64>> {
    if preds.len() != truths.len() || preds.is_empty() {
        return Err(Error::contract("predictions and truths must be nonempty and equally long"));
    }
    Ok(preds.iter().zip(truths).map(|(p, t)| (p - t).abs()).collect())
}

pub fn mae(preds: &[f64], truths: &[f64]) -> Result<f64> {
    let e = abs_errors(preds, truths)?;
    Ok(e.iter().sum::<f64>() / e.len() as f64)
}

pub fn median_ae(preds: &[f64], truths: &[f64]) -> Result<f64> {
    median(&abs_errors(preds, truths)?)
}

/// Median with the midpoint rule for even counts.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::contract("median of an empty list"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::contract("mean of an empty list"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

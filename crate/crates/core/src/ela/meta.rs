//! Linear and quadratic surrogate-model fits of the fitness.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::suite::DesignSet;

const GROUP: &str = "ela_meta";

struct Fit {
    coef: Vec<f64>,
    adj_r2: f64,
}

/// Least squares with an intercept column first; `None` columns are dropped.
fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<Fit> {
    let n = y.len();
    let p = columns.len();
    // p counts the intercept; adjusted R^2 needs n - p >= 1
    if n <= p {
        return Err(Error::degenerate(
            GROUP,
            format!("{n} points cannot fit a model with {p} coefficients"),
        ));
    }
    let a = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin.partial_cmp(&(smax * 1e-12)) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::degenerate(GROUP, "singular design matrix"));
    }
    let coef = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::degenerate(GROUP, e.to_string()))?;
    let fitted = &a * &coef;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let ssr: f64 = y.iter().zip(fitted.iter()).map(|(v, f)| (v - f).powi(2)).sum();
    let adj_r2 = if sst == 0.0 {
        0.0
    } else {
        let r2 = 1.0 - ssr / sst;
        1.0 - (1.0 - r2) * (n - 1) as f64 / (n - p) as f64
    };
    Ok(Fit {
        coef: coef.iter().copied().collect(),
        adj_r2,
    })
}

fn max_by_min(abs: &[f64]) -> f64 {
    let max = abs.iter().copied().fold(0.0, f64::max);
    let min = abs.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        1.0
    } else if min == 0.0 {
        f64::MAX
    } else {
        max / min
    }
}

/// 9 values: `lin_simple.{adj_r2, intercept, coef.min, coef.max, coef.max_by_min}`,
/// `lin_w_interact.adj_r2`, `quad_simple.{adj_r2, cond}`, `quad_w_interact.adj_r2`.
pub fn ela_meta_group(ds: &DesignSet) -> Result<Vec<f64>> {
    let d = ds.dim;
    let n = ds.len();
    if n <= d + 2 {
        return Err(Error::degenerate(GROUP, format!("{n} points for dimension {d}")));
    }
    let col = |j: usize| -> Vec<f64> { ds.points.iter().map(|p| p[j]).collect() };
    let prod = |a: usize, b: usize| -> Vec<f64> { ds.points.iter().map(|p| p[a] * p[b]).collect() };
    let y = &ds.fitness;

    let mut linear = vec![vec![1.0; n]];
    linear.extend((0..d).map(col));
    let lin = least_squares(&linear, y)?;
    let lin_abs: Vec<f64> = lin.coef[1..].iter().map(|c| c.abs()).collect();

    let mut interact = linear.clone();
    for a in 0..d {
        for b in a + 1..d {
            interact.push(prod(a, b));
        }
    }
    let lin_int = least_squares(&interact, y)?;

    let mut quad = linear.clone();
    quad.extend((0..d).map(|j| prod(j, j)));
    let quad_fit = least_squares(&quad, y)?;
    let quad_abs: Vec<f64> = quad_fit.coef[1 + d..].iter().map(|c| c.abs()).collect();

    let mut full = linear;
    for a in 0..d {
        for b in a..d {
            full.push(prod(a, b));
        }
    }
    let full_fit = least_squares(&full, y)?;

    let min_abs = lin_abs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_abs = lin_abs.iter().copied().fold(0.0, f64::max);
    Ok(vec![
        lin.adj_r2,
        lin.coef[0],
        min_abs,
        max_abs,
        max_by_min(&lin_abs),
        lin_int.adj_r2,
        quad_fit.adj_r2,
        max_by_min(&quad_abs),
        full_fit.adj_r2,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], f: impl Fn(f64) -> f64) -> DesignSet {
        DesignSet::from_parts(1, 1, xs.iter().map(|&x| vec![x]).collect(), xs.iter().map(|&x| f(x)).collect())
            .unwrap()
    }

    #[test]
    fn exact_linear_model() {
        let xs = [-2.0, -1.0, 0.5, 1.0, 3.0, 4.0];
        let v = ela_meta_group(&line(&xs, |x| 3.0 + 2.0 * x)).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12);
        assert!((v[1] - 3.0).abs() < 1e-12);
        assert!((v[2] - 2.0).abs() < 1e-12);
        assert!((v[3] - 2.0).abs() < 1e-12);
        assert!((v[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_fitness_maps_adj_r2_to_zero() {
        let xs = [-2.0, -1.0, 0.5, 1.0, 3.0, 4.0];
        let v = ela_meta_group(&line(&xs, |_| 5.0)).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[5], 0.0);
        assert_eq!(v[6], 0.0);
        assert_eq!(v[8], 0.0);
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn centred_square_is_exact_quadratic() {
        let xs = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        let v = ela_meta_group(&line(&xs, |x| x * x)).unwrap();
        assert!((v[6] - 1.0).abs() < 1e-8);
        assert!((v[7] - 1.0).abs() < 1e-12);
        // symmetric sample: the linear fit explains nothing
        assert!(v[0] < 0.0);
    }

    #[test]
    fn too_few_points() {
        let xs = [0.0, 1.0, 2.0];
        assert!(ela_meta_group(&line(&xs, |x| x)).is_err());
    }

    #[test]
    fn repeated_points_make_quadratic_singular() {
        let xs = [0.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let err = ela_meta_group(&line(&xs, |x| x)).unwrap_err();
        assert!(matches!(err, Error::Degenerate { group: "ela_meta", .. }));
    }
}

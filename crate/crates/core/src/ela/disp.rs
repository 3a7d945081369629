//! Dispersion: pairwise distances among the best points versus all points.

use super::stats::{dist, mean, median_in_place, quantile_count, rank_by_fitness};
use crate::error::{Error, Result};
use crate::suite::DesignSet;

const GROUP: &str = "disp";

fn pairwise(points: &[&[f64]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            out.push(dist(points[i], points[j]));
        }
    }
    out
}

/// 16 values: for each quantile `ratio_mean, ratio_median, diff_mean, diff_median`.
pub fn disp_group(ds: &DesignSet, quantiles: &[f64]) -> Result<Vec<f64>> {
    let n = ds.len();
    let order = rank_by_fitness(&ds.fitness);
    let subsets: Vec<usize> = quantiles.iter().map(|&q| quantile_count(q, n)).collect();
    if let Some((q, k)) = quantiles.iter().zip(&subsets).find(|(_, &k)| k < 2) {
        return Err(Error::degenerate(
            GROUP,
            format!("quantile {q} of {n} points keeps {k} point(s); need at least 2"),
        ));
    }
    let all: Vec<&[f64]> = ds.points.iter().map(Vec::as_slice).collect();
    let mut d_all = pairwise(&all);
    let mean_all = mean(&d_all);
    let median_all = median_in_place(&mut d_all);
    if mean_all == 0.0 || median_all == 0.0 {
        return Err(Error::degenerate(GROUP, "points are (mostly) coincident"));
    }
    let mut out = Vec::with_capacity(4 * quantiles.len());
    for &k in &subsets {
        let best: Vec<&[f64]> = order[..k].iter().map(|&i| all[i]).collect();
        let mut d = pairwise(&best);
        let m = mean(&d);
        let med = median_in_place(&mut d);
        out.extend([m / mean_all, med / median_all, m - mean_all, med - median_all]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64], fs: &[f64]) -> DesignSet {
        DesignSet::from_parts(1, 1, xs.iter().map(|&x| vec![x]).collect(), fs.to_vec()).unwrap()
    }

    #[test]
    fn hand_enumerated_line() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let v = disp_group(&ds, &[0.4]).unwrap();
        assert_eq!(v[0], 0.5);
        assert_eq!(v[2], -1.0);
    }

    #[test]
    fn coincident_elite_gives_zero_ratio() {
        let ds = line(&[1.0, 1.0, 4.0, 7.0, 9.0], &[0.0, 0.0, 3.0, 4.0, 5.0]);
        let v = disp_group(&ds, &[0.4]).unwrap();
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn constant_fitness_uses_index_order() {
        let ds = line(&[0.0, 2.0, 5.0, 6.0, 9.0], &[1.0; 5]);
        let v = disp_group(&ds, &[0.4]).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        // best two are the first two indices: distance 2
        let mean_all = {
            let xs = [0.0f64, 2.0, 5.0, 6.0, 9.0];
            let mut s = 0.0;
            for i in 0..5 {
                for j in i + 1..5 {
                    s += (xs[i] - xs[j]).abs();
                }
            }
            s / 10.0
        };
        assert!((v[0] - 2.0 / mean_all).abs() < 1e-15);
    }

    #[test]
    fn too_small_subset_is_degenerate() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let err = disp_group(&line(&xs, &xs), &[0.02]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { group: "disp", .. }));
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let ds = line(&[2.0; 6], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(disp_group(&ds, &[0.5]).is_err());
    }
}

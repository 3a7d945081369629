//! Nearest-better clustering: nearest-neighbour versus nearest-better distances.

use super::stats::{dist, mean, pearson, rank_by_fitness, sd};
use crate::error::{Error, Result};
use crate::suite::DesignSet;

const GROUP: &str = "nbc";

/// Per point: nearest-neighbour distance, nearest-better distance, and the
/// index of the nearest-better point (`None` for the best point).
pub struct NearestBetter {
    pub nn: Vec<f64>,
    pub nb: Vec<f64>,
    pub nb_index: Vec<Option<usize>>,
}

/// "Better" means earlier in the (fitness, index) order. The best point's
/// nearest-better distance is the largest pairwise distance.
pub fn nearest_better(ds: &DesignSet) -> NearestBetter {
    let n = ds.len();
    let order = rank_by_fitness(&ds.fitness);
    let mut pos = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        pos[i] = r;
    }
    let mut nn = vec![f64::INFINITY; n];
    let mut nb = vec![f64::INFINITY; n];
    let mut nb_index = vec![None; n];
    let mut max_d: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist(&ds.points[i], &ds.points[j]);
            max_d = max_d.max(d);
            if d < nn[i] {
                nn[i] = d;
            }
            if pos[j] < pos[i] && d < nb[i] {
                nb[i] = d;
                nb_index[i] = Some(j);
            }
        }
    }
    nb[order[0]] = max_d;
    NearestBetter { nn, nb, nb_index }
}

/// 5 values: `nn_nb.sd_ratio, nn_nb.mean_ratio, nn_nb.cor, dist_ratio.coeff_var, nb_fitness.cor`.
pub fn nbc_group(ds: &DesignSet) -> Result<Vec<f64>> {
    let n = ds.len();
    if n < 3 {
        return Err(Error::degenerate(GROUP, format!("{n} points; need at least 3")));
    }
    let NearestBetter { nn, nb, nb_index } = nearest_better(ds);
    let sd_nb = sd(&nb);
    if sd_nb == 0.0 {
        return Err(Error::degenerate(GROUP, "nearest-better distances have no spread"));
    }
    if nb.contains(&0.0) {
        return Err(Error::degenerate(GROUP, "coincident points"));
    }
    let ratios: Vec<f64> = nn.iter().zip(&nb).map(|(a, b)| a / b).collect();
    let mut indegree = vec![0.0; n];
    for j in nb_index.iter().flatten() {
        indegree[*j] += 1.0;
    }
    Ok(vec![
        sd(&nn) / sd_nb,
        mean(&nn) / mean(&nb),
        pearson(&nn, &nb),
        sd(&ratios) / mean(&ratios),
        pearson(&ds.fitness, &indegree),
    ])
}

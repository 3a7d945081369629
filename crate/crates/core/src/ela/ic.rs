//! Information content of fitness changes along a nearest-neighbour tour.

use rand::Rng;

use super::stats::dist;
use crate::rng::rng_from;
use crate::suite::DesignSet;

/// Entropy threshold below which the landscape counts as settled.
pub const SETTLING_THRESHOLD: f64 = 0.05;
pub const HALF_MAX_RATIO: f64 = 0.5;

/// `{0}` followed by `10^(k/2)` for `k = -10..=30` (1e-5 .. 1e15).
pub fn default_epsilons() -> Vec<f64> {
    let mut eps = vec![0.0];
    eps.extend((-10..=30).map(|k: i32| {
        let decade = format!("1e{}", k.div_euclid(2)).parse::<f64>().unwrap();
        if k.rem_euclid(2) == 0 {
            decade
        } else {
            decade * 10f64.sqrt()
        }
    }));
    eps
}

/// Greedy nearest-neighbour ordering from a seeded start; ties go to the lower index.
pub fn nearest_neighbour_tour(points: &[Vec<f64>], seed: u64) -> Vec<usize> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let start = rng_from(&[0x1C70, seed]).random_range(0..n);
    let mut visited = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut at = start;
    visited[at] = true;
    tour.push(at);
    for _ in 1..n {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..n {
            if !visited[j] {
                let d = dist(&points[at], &points[j]);
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        at = best.1;
        visited[at] = true;
        tour.push(at);
    }
    tour
}

pub fn symbolize(diffs: &[f64], eps: f64) -> Vec<i8> {
    diffs
        .iter()
        .map(|&d| {
            if d > eps {
                1
            } else if d < -eps {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Entropy (base 6) of consecutive unequal symbol pairs.
pub fn block_entropy(symbols: &[i8]) -> f64 {
    if symbols.len() < 2 {
        return 0.0;
    }
    let pairs = (symbols.len() - 1) as f64;
    let mut counts = [[0usize; 3]; 3];
    for w in symbols.windows(2) {
        counts[(w[0] + 1) as usize][(w[1] + 1) as usize] += 1;
    }
    let mut h = 0.0;
    for (a, row) in counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if a != b && c > 0 {
                let p = c as f64 / pairs;
                h -= p * p.log(6.0);
            }
        }
    }
    h
}

/// Length of the symbol string with zeros and repeats removed, over its length.
pub fn partial_information(symbols: &[i8]) -> f64 {
    if symbols.is_empty() {
        return 0.0;
    }
    let mut mu = 0usize;
    let mut last = 0i8;
    for &s in symbols {
        if s != 0 && s != last {
            mu += 1;
            last = s;
        }
    }
    mu as f64 / symbols.len() as f64
}

/// 5 values: `h_max, eps_s, eps_max, eps_ratio, m0`.
pub fn ic_group(ds: &DesignSet, epsilons: &[f64], seed: u64) -> Vec<f64> {
    let tour = nearest_neighbour_tour(&ds.points, seed);
    let diffs: Vec<f64> = tour
        .windows(2)
        .map(|w| ds.fitness[w[1]] - ds.fitness[w[0]])
        .collect();
    let mut h_max = f64::NEG_INFINITY;
    let mut eps_max = 0.0;
    let mut eps_s = None;
    let mut ms = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let symbols = symbolize(&diffs, eps);
        let h = block_entropy(&symbols);
        if h > h_max {
            h_max = h;
            eps_max = eps;
        }
        if eps_s.is_none() && h < SETTLING_THRESHOLD {
            eps_s = Some(eps);
        }
        ms.push(partial_information(&symbols));
    }
    let last = epsilons.last().copied().unwrap_or(0.0);
    let m0 = partial_information(&symbolize(&diffs, 0.0));
    let eps_ratio = epsilons
        .iter()
        .zip(&ms)
        .filter(|(_, &m)| m0 > 0.0 && m > HALF_MAX_RATIO * m0)
        .map(|(&e, _)| e)
        .fold(0.0, f64::max);
    vec![h_max.max(0.0), eps_s.unwrap_or(last), eps_max, eps_ratio, m0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_entropy() {
        let s = symbolize(&[1.0, -1.0, 1.0], 0.0);
        assert_eq!(s, vec![1, -1, 1]);
        let expected = -2.0 * 0.5 * 0.5f64.ln() / 6f64.ln();
        assert!((block_entropy(&s) - expected).abs() < 1e-15);
        assert!((expected - 0.386_852_807_234_541_6).abs() < 1e-12);
    }

    #[test]
    fn constant_fitness_is_flat() {
        let pts: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let ds = DesignSet::from_parts(1, 1, pts, vec![4.0; 12]).unwrap();
        let v = ic_group(&ds, &default_epsilons(), 5);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[4], 0.0);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn epsilon_grid_shape() {
        let eps = default_epsilons();
        assert_eq!(eps.len(), 42);
        assert_eq!(eps[1], 1e-5);
        assert_eq!(*eps.last().unwrap(), 1e15);
        assert!(eps.windows(2).all(|w| w[0] < w[1]));
        // consecutive decades differ by exactly two steps
        for k in 1..eps.len() - 2 {
            assert!((eps[k + 2] / eps[k] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_information_counts_changes() {
        assert_eq!(partial_information(&[1, 1, 0, -1, -1, 1]), 3.0 / 6.0);
        assert_eq!(partial_information(&[0, 0]), 0.0);
    }

    #[test]
    fn tour_visits_every_point_once() {
        let pts: Vec<Vec<f64>> = (0..9).map(|i| vec![(i * 4 % 9) as f64]).collect();
        let mut t = nearest_neighbour_tour(&pts, 2);
        t.sort_unstable();
        assert_eq!(t, (0..9).collect::<Vec<_>>());
    }
}

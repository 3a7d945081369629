//! Shared test oracles.
#![allow(dead_code)]

use ppr_core::rng::derive_seed;
use ppr_core::trees::Criterion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CRITERIA: [Criterion; 3] = [Criterion::Mse, Criterion::Mae, Criterion::FriedmanMse];

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn score(crit: Criterion, l: &[f64], r: &[f64]) -> f64 {
    match crit {
        Criterion::Mse => {
            let sse = |v: &[f64]| {
                let m = mean(v);
                v.iter().map(|y| (y - m) * (y - m)).sum::<f64>()
            };
            sse(l) + sse(r)
        }
        Criterion::Mae => {
            let sad = |v: &[f64]| {
                let m = median(v);
                v.iter().map(|y| (y - m).abs()).sum::<f64>()
            };
            sad(l) + sad(r)
        }
        Criterion::FriedmanMse => {
            let (nl, nr) = (l.len() as f64, r.len() as f64);
            let d = mean(l) - mean(r);
            -(nl * nr / (nl + nr)) * d * d
        }
    }
}

/// Brute-force CART: every (feature, midpoint) candidate in order, the first
/// minimal score wins. Returns the leaf value for every training row.
pub fn oracle(x: &[Vec<f64>], y: &[f64], rows: &[usize], crit: Criterion, minsplit: usize, out: &mut [f64]) {
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let leaf = if crit == Criterion::Mae { median(&ys) } else { mean(&ys) };
    let p = x[0].len();
    let pure = ys.iter().all(|v| *v == ys[0]);
    let mut best: Option<(f64, usize, f64)> = None;
    if rows.len() >= minsplit && !pure {
        #[allow(clippy::needless_range_loop)]
        for f in 0..p {
            let mut vals: Vec<f64> = rows.iter().map(|&i| x[i][f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let t = (w[0] + w[1]) / 2.0;
                let l: Vec<f64> = rows.iter().filter(|&&i| x[i][f] <= t).map(|&i| y[i]).collect();
                let r: Vec<f64> = rows.iter().filter(|&&i| x[i][f] > t).map(|&i| y[i]).collect();
                let s = score(crit, &l, &r);
                if best.is_none_or(|b| s < b.0 - 1e-9) {
                    best = Some((s, f, t));
                }
            }
        }
    }
    match best {
        None => rows.iter().for_each(|&i| out[i] = leaf),
        Some((_, f, t)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] <= t);
            oracle(x, y, &l, crit, minsplit, out);
            oracle(x, y, &r, crit, minsplit, out);
        }
    }
}

pub fn random_dataset(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=12);
    let p = rng.random_range(1..=3);
    let x = (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(0..5) as f64 * 0.5).collect())
        .collect();
    let y = (0..n).map(|_| rng.random_range(-4..=6) as f64).collect();
    (x, y)
}


/// Dataset number `case` of the shared random family.
pub fn oracle_case(case: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    random_dataset(derive_seed(&[0x7EE, case]))
}

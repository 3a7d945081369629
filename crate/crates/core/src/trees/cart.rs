//! CART regression trees.
//!
//! Splits are axis-aligned at midpoints between consecutive distinct feature
//! values. Candidates are scanned in (feature, threshold) order and a later
//! candidate replaces the incumbent only when it improves the score by more
//! than a relative tolerance, so near-equal splits resolve to the earliest.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::Criterion;
use crate::error::{Error, Result};

/// Relative tolerance for accepting a strictly better split.
pub const SPLIT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A fitted regression tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

pub(crate) fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::contract("cannot fit on an empty design"));
    }
    if x.len() != y.len() {
        return Err(Error::contract(format!(
            "{} rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    let p = x[0].len();
    if p == 0 || x.iter().any(|r| r.len() != p) {
        return Err(Error::contract("rows must share a nonzero feature count"));
    }
    Ok(p)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Median with the midpoint convention for even counts.
pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len();
    if m % 2 == 1 {
        s[m / 2]
    } else {
        0.5 * (s[m / 2 - 1] + s[m / 2])
    }
}

/// Split-time options that vary between single trees and forests.
pub(crate) struct GrowOptions<'r> {
    pub minsplit: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
    pub rng: Option<&'r mut ChaCha8Rng>,
}

/// Fits a single tree on all rows with every feature considered at each split.
pub fn fit_tree(x: &[Vec<f64>], y: &[f64], crit: Criterion, minsplit: usize) -> Result<RegressionTree> {
    check_xy(x, y)?;
    let rows: Vec<usize> = (0..x.len()).collect();
    Ok(grow_tree(
        x,
        y,
        &rows,
        crit,
        GrowOptions {
            minsplit,
            max_features: None,
            rng: None,
        },
    ))
}

/// Grows a tree on `rows` (which may repeat indices, as in a bootstrap sample).
pub(crate) fn grow_tree(
    x: &[Vec<f64>],
    y: &[f64],
    rows: &[usize],
    crit: Criterion,
    opts: GrowOptions<'_>,
) -> RegressionTree {
    let mut builder = Builder {
        x,
        y,
        crit,
        opts,
        nodes: Vec::new(),
        fenwick: Fenwick::default(),
    };
    builder.grow(rows.to_vec());
    RegressionTree {
        n_features: x[0].len(),
        nodes: builder.nodes,
    }
}

struct Builder<'a, 'r> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    crit: Criterion,
    opts: GrowOptions<'r>,
    nodes: Vec<Node>,
    fenwick: Fenwick,
}

impl Builder<'_, '_> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let ys: Vec<f64> = rows.iter().map(|&r| self.y[r]).collect();
        match self.crit {
            Criterion::Mae => median(&ys),
            Criterion::Mse | Criterion::FriedmanMse => mean(&ys),
        }
    }

    fn grow(&mut self, rows: Vec<usize>) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(&rows),
        });
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&r| self.y[r] == first);
        if rows.len() < self.opts.minsplit || pure {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(&rows) else {
            return at;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.x[r][feature] <= threshold);
        drop(rows);
        let left = self.grow(left_rows);
        let right = self.grow(right_rows);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn candidate_features(&mut self, rows: &[usize]) -> Vec<usize> {
        let p = self.x[0].len();
        let varies = |f: usize| {
            let v = self.x[rows[0]][f];
            rows.iter().any(|&r| self.x[r][f] != v)
        };
        match (self.opts.max_features, self.opts.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < p => {
                let mut perm: Vec<usize> = (0..p).collect();
                perm.shuffle(rng);
                let mut chosen: Vec<usize> = perm.into_iter().filter(|&f| varies(f)).take(m).collect();
                chosen.sort_unstable();
                chosen
            }
            _ => (0..p).filter(|&f| varies(f)).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let features = self.candidate_features(rows);
        if features.is_empty() {
            return None;
        }
        let ys: Vec<f64> = rows.iter().map(|&r| self.y[r]).collect();
        let m = ys.len();
        let centre = mean(&ys);
        let sum: f64 = ys.iter().map(|v| v - centre).sum();
        let sq: f64 = ys.iter().map(|v| (v - centre).powi(2)).sum();
        let sse_parent = (sq - sum * sum / m as f64).max(0.0);

        // rank of each local position by (y, position), for the median scans
        let mut by_y: Vec<usize> = (0..m).collect();
        let mut rank = vec![0usize; m];
        let mut sorted_y = vec![0.0; m];
        let mut sad_parent = 0.0;
        if self.crit == Criterion::Mae {
            by_y.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]).then(a.cmp(&b)));
            for (r, &i) in by_y.iter().enumerate() {
                rank[i] = r;
                sorted_y[r] = ys[i];
            }
            let med = median(&ys);
            sad_parent = ys.iter().map(|v| (v - med).abs()).sum();
        }
        let scale = match self.crit {
            Criterion::Mae => sad_parent,
            _ => sse_parent,
        };
        let tol = SPLIT_TOLERANCE * scale;

        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<usize> = (0..m).collect();
        for &f in &features {
            let xs: Vec<f64> = rows.iter().map(|&r| self.x[r][f]).collect();
            order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]).then(a.cmp(&b)));
            let mut consider = |k: usize, score: f64| {
                let (lo, hi) = (xs[order[k - 1]], xs[order[k]]);
                if lo == hi {
                    return;
                }
                if best.is_none_or(|(s, _, _)| score < s - tol) {
                    best = Some((score, f, midpoint(lo, hi)));
                }
            };
            match self.crit {
                Criterion::Mse | Criterion::FriedmanMse => {
                    let (mut sl, mut ql) = (0.0, 0.0);
                    for k in 1..m {
                        let v = ys[order[k - 1]] - centre;
                        sl += v;
                        ql += v * v;
                        let (nl, nr) = (k as f64, (m - k) as f64);
                        let sr = sum - sl;
                        let score = if self.crit == Criterion::Mse {
                            (ql - sl * sl / nl) + ((sq - ql) - sr * sr / nr)
                        } else {
                            let diff = sl / nl - sr / nr;
                            -(nl * nr / m as f64) * diff * diff
                        };
                        consider(k, score);
                    }
                }
                Criterion::Mae => {
                    self.fenwick.reset(&sorted_y);
                    for k in 1..m {
                        self.fenwick.move_left(rank[order[k - 1]]);
                        consider(k, self.fenwick.sad_left() + self.fenwick.sad_right());
                    }
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Two Fenwick trees over y-ranks tracking the left and right halves of a
/// scan, giving sum-of-absolute-deviation from the median in O(log n).
#[derive(Default)]
struct Fenwick {
    values: Vec<f64>,
    left_cnt: Vec<i64>,
    left_sum: Vec<f64>,
    right_cnt: Vec<i64>,
    right_sum: Vec<f64>,
    n_left: usize,
    total_left: f64,
    total_right: f64,
}

impl Fenwick {
    fn reset(&mut self, sorted_values: &[f64]) {
        let m = sorted_values.len();
        self.values = sorted_values.to_vec();
        self.left_cnt = vec![0; m + 1];
        self.left_sum = vec![0.0; m + 1];
        self.right_cnt = vec![0; m + 1];
        self.right_sum = vec![0.0; m + 1];
        for (r, &v) in sorted_values.iter().enumerate() {
            Self::add(&mut self.right_cnt, &mut self.right_sum, r, 1, v);
        }
        self.n_left = 0;
        self.total_left = 0.0;
        self.total_right = sorted_values.iter().sum();
    }

    fn add(cnt: &mut [i64], sum: &mut [f64], rank: usize, dc: i64, dv: f64) {
        let mut i = rank + 1;
        while i < cnt.len() {
            cnt[i] += dc;
            sum[i] += dv;
            i += i & i.wrapping_neg();
        }
    }

    fn move_left(&mut self, rank: usize) {
        let v = self.values[rank];
        Self::add(&mut self.right_cnt, &mut self.right_sum, rank, -1, -v);
        Self::add(&mut self.left_cnt, &mut self.left_sum, rank, 1, v);
        self.n_left += 1;
        self.total_left += v;
        self.total_right -= v;
    }

    /// Rank of the k-th smallest element (1-based) and the sum of the k smallest.
    fn kth(cnt: &[i64], sum: &[f64], mut k: i64) -> (usize, f64) {
        let n = cnt.len() - 1;
        let mut pos = 0;
        let mut acc = 0.0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && cnt[next] < k {
                k -= cnt[next];
                acc += sum[next];
                pos = next;
            }
            step >>= 1;
        }
        // pos is the count of ranks strictly before the target
        (pos, acc)
    }

    fn sad(&self, cnt: &[i64], sum: &[f64], c: usize, total: f64) -> f64 {
        if c == 0 {
            return 0.0;
        }
        let k = c.div_ceil(2);
        let (rank, below) = Self::kth(cnt, sum, k as i64);
        let med = self.values[rank];
        let below = below + med;
        let above = total - below;
        (med * k as f64 - below) + (above - med * (c - k) as f64)
    }

    fn sad_left(&self) -> f64 {
        self.sad(&self.left_cnt, &self.left_sum, self.n_left, self.total_left)
    }

    fn sad_right(&self) -> f64 {
        let c = self.values.len() - self.n_left;
        self.sad(&self.right_cnt, &self.right_sum, c, self.total_right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_target_is_a_single_leaf() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let t = fit_tree(&x, &[7.0; 3], Criterion::Mse, 2).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 7.0 }]);
        assert_eq!(t.predict(&[100.0]), 7.0);
    }

    #[test]
    fn minsplit_gate_keeps_root_leaf() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = [1.0, 2.0, 6.0];
        let t = fit_tree(&x, &y, Criterion::Mse, 4).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 3.0 }]);
        let t = fit_tree(&x, &y, Criterion::Mae, 4).unwrap();
        assert_eq!(t.nodes, vec![Node::Leaf { value: 2.0 }]);
    }

    #[test]
    fn two_points_fit_perfectly() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = [0.0, 1.0];
        for crit in [Criterion::Mse, Criterion::Mae, Criterion::FriedmanMse] {
            let t = fit_tree(&x, &y, crit, 2).unwrap();
            assert_eq!(t.predict(&[0.0]), 0.0);
            assert_eq!(t.predict(&[1.0]), 1.0);
            assert!(matches!(t.nodes[0], Node::Split { threshold, .. } if threshold == 0.5));
        }
    }

    #[test]
    fn empty_design_is_rejected() {
        assert!(matches!(
            fit_tree(&[], &[], Criterion::Mse, 2),
            Err(Error::Contract(_))
        ));
        assert!(fit_tree(&[vec![1.0]], &[1.0, 2.0], Criterion::Mse, 2).is_err());
    }

    #[test]
    fn fenwick_sad_matches_direct() {
        let vals: [f64; 8] = [3.0, -1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let sorted: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
        let mut rank = vec![0; vals.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut fw = Fenwick::default();
        fw.reset(&sorted);
        let direct = |s: &[f64]| {
            if s.is_empty() {
                return 0.0;
            }
            let m = median(s);
            s.iter().map(|v| (v - m).abs()).sum::<f64>()
        };
        for k in 0..vals.len() {
            fw.move_left(rank[k]);
            assert!((fw.sad_left() - direct(&vals[..=k])).abs() < 1e-12);
            assert!((fw.sad_right() - direct(&vals[k + 1..])).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_never_reaches_upper_value() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        assert_eq!(midpoint(lo, hi), lo);
        assert_eq!(midpoint(0.0, 1.0), 0.5);
    }
}

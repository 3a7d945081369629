use ppr_core::trees::{
    enumerate_grid, fit_classifier_ensemble, fit_forest, fit_regressor, fit_tree, fit_tree_regressor,
    predict_class, predict_regressor, Criterion, Node, RMConfig, RegressionTree, Technique,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

use common::{oracle, oracle_case, random_dataset, CRITERIA};

#[test]
fn matches_exhaustive_split_oracle() {
    for case in 0..50u64 {
        let (x, y) = oracle_case(case);
        for crit in CRITERIA {
            for minsplit in [2, 4] {
                let model = fit_tree_regressor(&x, &y, crit, minsplit, case).unwrap();
                let mut want = vec![0.0; y.len()];
                let rows: Vec<usize> = (0..y.len()).collect();
                oracle(&x, &y, &rows, crit, minsplit, &mut want);
                for (i, r) in x.iter().enumerate() {
                    assert_eq!(
                        predict_regressor(&model, r).unwrap(),
                        want[i],
                        "case {case} crit {crit:?} minsplit {minsplit} row {i}"
                    );
                }
            }
        }
    }
}

#[test]
fn small_examples() {
    let x = vec![vec![0.0], vec![1.0], vec![2.0]];
    let t = fit_tree(&x, &[7.0, 7.0, 7.0], Criterion::Mse, 2).unwrap();
    assert_eq!(t.n_leaves(), 1);
    assert_eq!(t.predict(&[100.0]), 7.0);

    let y = [1.0, 2.0, 6.0];
    assert_eq!(fit_tree(&x, &y, Criterion::Mse, 4).unwrap().predict(&[0.0]), 3.0);
    assert_eq!(fit_tree(&x, &y, Criterion::Mae, 4).unwrap().predict(&[0.0]), 2.0);

    let two = vec![vec![0.0], vec![1.0]];
    let t = fit_tree(&two, &[0.0, 1.0], Criterion::Mse, 2).unwrap();
    assert_eq!(t.predict(&[0.0]), 0.0);
    assert_eq!(t.predict(&[1.0]), 1.0);

    assert!(fit_tree(&[], &[], Criterion::Mse, 2).is_err());
}

fn traverse(tree: &RegressionTree, at: usize, x: &[f64]) -> f64 {
    match &tree.nodes[at] {
        Node::Leaf { value } => *value,
        Node::Split { feature, threshold, left, right } => {
            if x[*feature] > *threshold {
                traverse(tree, *right, x)
            } else {
                traverse(tree, *left, x)
            }
        }
    }
}

#[test]
fn forest_mean_and_traversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..60).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| r[0].sin() + r[1] * r[2]).collect();
    for technique in [Technique::RandomForest, Technique::BaggingDT] {
        let cfg = RMConfig::forest(technique, Criterion::Mse, 4, 10);
        let m = fit_forest(&x, &y, &cfg, 3).unwrap();
        assert_eq!(m.trees.len(), 10);
        for _ in 0..50 {
            let q: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
            let per_tree: Vec<f64> = m.trees.iter().map(|t| traverse(t, 0, &q)).collect();
            assert_eq!(per_tree, m.tree_predictions(&q));
            let p = m.predict(&q).unwrap();
            let (lo, hi) = per_tree.iter().fold((f64::MAX, f64::MIN), |a, v| (a.0.min(*v), a.1.max(*v)));
            assert!(p >= lo && p <= hi);
        }
    }
}

#[test]
fn forest_of_constant_trees_averages() {
    // three single-leaf trees over targets {1}, {2}, {3}
    let mut m = fit_regressor(&[vec![0.0]], &[1.0], &RMConfig::forest(Technique::BaggingDT, Criterion::Mse, 2, 10), 0).unwrap();
    m.trees = [1.0, 2.0, 3.0]
        .iter()
        .map(|v| fit_tree(&[vec![0.0]], &[*v], Criterion::Mse, 2).unwrap())
        .collect();
    assert_eq!(m.predict(&[5.0]).unwrap(), 2.0);
    assert!(m.predict(&[1.0, 2.0]).is_err());
}

#[test]
fn classifier_defaults_and_fit() {
    let mut x = Vec::new();
    let mut labels = Vec::new();
    for (label, c) in [(1u32, -10.0), (2, 0.0), (3, 10.0), (4, 20.0)] {
        for i in 0..6 {
            x.push(vec![c + i as f64 * 0.1, c * 2.0 - i as f64, (i % 2) as f64 + c]);
            labels.push(label);
        }
    }
    let ens = fit_classifier_ensemble(&x, &labels, 8).unwrap();
    let names: Vec<String> = ens.members.iter().map(|m| m.config.to_string()).collect();
    assert_eq!(
        names,
        [
            "BaggingDT_crit-entropy_minsplit-2_nest-9",
            "RandomForest_crit-entropy_minsplit-2_nest-9",
            "RandomForest_crit-gini_minsplit-2_nest-9"
        ]
    );
    for (r, l) in x.iter().zip(&labels) {
        assert_eq!(predict_class(&ens, r).unwrap(), *l);
    }
    assert_eq!(ens, fit_classifier_ensemble(&x, &labels, 8).unwrap());
    assert!(fit_classifier_ensemble(&x, &vec![1; x.len()], 8).is_err());
}

#[test]
fn grid_order() {
    let g = enumerate_grid();
    assert_eq!(g.len(), 430);
    assert_eq!(g[0].to_string(), "DecisionTree_crit-mse_minsplit-2");
    assert_eq!(g[429].to_string(), "BaggingDT_crit-mae_minsplit-20_nest-100");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn training_error_grows_with_minsplit(seed in any::<u64>(), crit_i in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..40).map(|_| (0..2).map(|_| rng.random_range(0..8) as f64).collect()).collect();
        let y: Vec<f64> = (0..40).map(|_| rng.random_range(-5.0..5.0)).collect();
        let crit = CRITERIA[crit_i];
        let mut last = -1.0;
        for minsplit in (2..=20).step_by(2) {
            let t = fit_tree(&x, &y, crit, minsplit).unwrap();
            // squared error for mean leaves, absolute error for median leaves
            let err: f64 = x
                .iter()
                .zip(&y)
                .map(|(r, v)| {
                    let e = t.predict(r) - v;
                    if crit == Criterion::Mae { e.abs() } else { e * e }
                })
                .sum();
            prop_assert!(err >= last - 1e-9, "minsplit {}: {} < {}", minsplit, err, last);
            last = err;
        }
    }

    #[test]
    fn predictions_are_deterministic(seed in any::<u64>()) {
        let (x, y) = random_dataset(seed);
        let cfg = RMConfig::forest(Technique::RandomForest, Criterion::Mae, 2, 10);
        let a = fit_forest(&x, &y, &cfg, seed).unwrap();
        let b = fit_forest(&x, &y, &cfg, seed).unwrap();
        for r in &x {
            prop_assert_eq!(a.predict(r).unwrap().to_bits(), b.predict(r).unwrap().to_bits());
        }
    }
}

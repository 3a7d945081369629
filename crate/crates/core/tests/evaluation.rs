use std::collections::BTreeMap;

use ppr_core::evaluation::{
    mae, make_stratified_folds, median_ae, relative_advantage, run_evaluation, select_best_test,
    select_best_train, select_best_train_instance, transform_target, ClassSource, EvalOptions,
    Scenario, TargetTransform,
};
use ppr_core::personalize::{QTable, TrainOptions, TrainingRow};
use ppr_core::trees::{enumerate_grid, Criterion, RMConfig, Technique};
use ppr_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn keys(problems: u32, instances: u32) -> Vec<(u32, u32)> {
    (1..=problems).flat_map(|p| (1..=instances).map(move |i| (p, i))).collect()
}

#[test]
fn folds_hold_one_instance_of_every_problem() {
    let spec = make_stratified_folds(&keys(24, 5), 5).unwrap();
    assert_eq!(spec.k(), 5);
    for (t, fold) in spec.folds.iter().enumerate() {
        assert_eq!(fold.len(), 24);
        assert!(fold.iter().all(|&(_, i)| i == t as u32 + 1));
    }
    let two = make_stratified_folds(&keys(2, 5), 5).unwrap();
    assert!(two.folds.iter().all(|f| f.len() == 2));
    let mut missing = keys(3, 5);
    missing.retain(|&k| k != (2, 3));
    assert!(matches!(make_stratified_folds(&missing, 5), Err(Error::Data(_))));
    assert!(make_stratified_folds(&keys(2, 3), 5).is_err());
}

#[test]
fn metric_examples() {
    assert_eq!(mae(&[0.0, 4.0], &[1.0, 1.0]).unwrap(), 2.0);
    assert_eq!(median_ae(&[1.0, 2.0, 9.0, 10.0], &[0.0; 4]).unwrap(), 5.5);
    assert!(matches!(mae(&[], &[]), Err(Error::Contract(_))));
    assert_eq!(transform_target(5.0, TargetTransform::Raw).unwrap(), 5.0);
    assert!((transform_target(0.0, TargetTransform::NaturalLog).unwrap() + 18.4207).abs() < 1e-4);
    assert!(matches!(transform_target(-0.1, TargetTransform::NaturalLog), Err(Error::Data(_))));
}

#[test]
fn crossed_minima_separate_the_scopes() {
    let configs = vec![
        RMConfig::decision_tree(Criterion::Mse, 2),
        RMConfig::decision_tree(Criterion::Mse, 4),
        RMConfig::decision_tree(Criterion::Mse, 6),
    ];
    // config 2 wins overall, configs 0 and 1 each win one problem
    let q = QTable {
        configs,
        classes: vec![1, 2],
        counts: vec![4, 4],
        values: vec![vec![0.1, 5.0], vec![5.0, 0.1], vec![1.0, 1.0]],
    };
    assert_eq!(select_best_train(&q), 2);
    assert_eq!(select_best_train_instance(&q, 1).unwrap(), 0);
    assert_eq!(select_best_train_instance(&q, 2).unwrap(), 1);
    assert_eq!(select_best_test(&[3.0, 1.0, 1.0]).unwrap(), 1);
}

#[test]
fn selection_matches_exhaustive_scan() {
    let grid = enumerate_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let values: Vec<Vec<f64>> = grid.iter().map(|_| (0..4).map(|_| rng.random_range(0..50) as f64).collect()).collect();
        let counts = vec![3, 5, 4, 4];
        let q = QTable { configs: grid.clone(), classes: vec![1, 2, 3, 4], counts: counts.clone(), values: values.clone() };
        let pooled: Vec<f64> = values
            .iter()
            .map(|r| r.iter().zip(&counts).map(|(v, &n)| v * n as f64).sum::<f64>() / 16.0)
            .collect();
        let mut best = 0;
        for i in 1..grid.len() {
            if pooled[i] < pooled[best] {
                best = i;
            }
        }
        assert_eq!(select_best_train(&q), best);
        for (k, p) in [1u32, 2, 3, 4].iter().enumerate() {
            let mut b = 0;
            for i in 1..grid.len() {
                if values[i][k] < values[b][k] {
                    b = i;
                }
            }
            assert_eq!(select_best_train_instance(&q, *p).unwrap(), b);
        }
    }
}

#[test]
fn dominant_config_wins_every_scope() {
    let grid: Vec<RMConfig> = enumerate_grid().into_iter().take(5).collect();
    let mut values = vec![vec![2.0, 3.0]; 5];
    values[3] = vec![0.5, 0.5];
    let q = QTable { configs: grid, classes: vec![1, 2], counts: vec![2, 2], values };
    assert_eq!(select_best_train(&q), 3);
    assert_eq!(select_best_train_instance(&q, 1).unwrap(), 3);
    assert_eq!(select_best_train_instance(&q, 2).unwrap(), 3);
    assert_eq!(select_best_test(&[2.0, 2.0, 2.0, 0.1, 2.0]).unwrap(), 3);
}

/// Four problems, five instances each, separable feature clusters.
fn synthetic(problems: u32) -> Vec<TrainingRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rows = Vec::new();
    for p in 1..=problems {
        for i in 1..=5 {
            let a: f64 = rng.random_range(0.0..1.0);
            let center = 4.0 * p as f64;
            rows.push(TrainingRow {
                problem_id: p,
                instance_id: i,
                features: vec![center + a, rng.random_range(0.0..1.0), center],
                target: if p % 2 == 0 { (3.0 * a).floor() } else { a * a + p as f64 },
            });
        }
    }
    rows
}

fn small_grid() -> Vec<RMConfig> {
    vec![
        RMConfig::decision_tree(Criterion::Mse, 2),
        RMConfig::decision_tree(Criterion::Mae, 6),
        RMConfig::forest(Technique::RandomForest, Criterion::Mse, 2, 10),
        RMConfig::forest(Technique::RandomForest, Criterion::Mae, 4, 10),
        RMConfig::forest(Technique::BaggingDT, Criterion::Mse, 4, 10),
        RMConfig::forest(Technique::BaggingDT, Criterion::Mae, 2, 20),
    ]
}

#[test]
fn oracle_classes_make_both_ensemble_columns_equal() {
    let rows = synthetic(4);
    let opts = EvalOptions { class_source: ClassSource::Oracle, seed: 3, ..EvalOptions::default() };
    let res = run_evaluation(&rows, &small_grid(), &opts).unwrap();
    for fold in &res.predictions {
        for row in fold {
            assert_eq!(
                row.values[&Scenario::EnsembleClass].to_bits(),
                row.values[&Scenario::EnsembleGround].to_bits()
            );
        }
    }
    assert_eq!(res.confusion.accuracy(), 1.0);
    assert_eq!(res.confusion.trace(), 20);
}

#[test]
fn report_shape_and_leakage_guard() {
    let rows = synthetic(4);
    let opts = EvalOptions { best_test: false, ..EvalOptions::default() };
    let res = run_evaluation(&rows, &small_grid(), &opts).unwrap();
    assert!(res.report.folds.iter().all(|f| f.early_target_reads == 0));
    for cells in res.report.problems.values() {
        assert_eq!(cells.len(), 4);
        assert!(cells.values().all(|c| c.errors.len() == 5));
    }
    assert!(res.report.metadata.best_test.is_none());

    let full = run_evaluation(&rows, &small_grid(), &EvalOptions::default()).unwrap();
    for cells in full.report.problems.values() {
        assert_eq!(cells.len(), 5);
    }
    let cm = &full.confusion;
    assert_eq!(cm.row_sums(), vec![5; 4]);
    assert_eq!(cm.total(), 20);
    let correct: usize = full.report.folds.iter().map(|f| f.classifier_correct).sum();
    assert_eq!(cm.trace(), correct as u64);
    assert_eq!(full.report.metadata.fold_seeds.len(), 5);
    // fold seeds make reruns identical
    assert_eq!(full, run_evaluation(&rows, &small_grid(), &EvalOptions::default()).unwrap());
}

#[test]
fn held_out_targets_do_not_move_their_own_predictions() {
    let rows = synthetic(4);
    let opts = EvalOptions { best_test: false, ..EvalOptions::default() };
    let base = run_evaluation(&rows, &small_grid(), &opts).unwrap();
    let mut poked = rows.clone();
    for r in poked.iter_mut().filter(|r| r.instance_id == 1) {
        r.target += 1000.0;
    }
    let moved = run_evaluation(&poked, &small_grid(), &opts).unwrap();
    // fold 0 holds instance 1: its predictions never saw those targets
    assert_eq!(base.predictions[0], moved.predictions[0]);
    assert_ne!(base.predictions[1], moved.predictions[1]);
}

#[test]
fn report_json_round_trip() {
    let rows = synthetic(2);
    let res = run_evaluation(&rows, &small_grid(), &EvalOptions::default()).unwrap();
    let text = res.report.to_json().unwrap();
    let back = ppr_core::evaluation::ScenarioReport::from_json(&text).unwrap();
    assert_eq!(back, res.report);
    let table = res.report.render_table(Some(&res.confusion));
    assert!(table.contains("Best-train-instance") && table.contains("classifier: "));
}

#[test]
fn hold_out_weighting_runs_end_to_end() {
    let rows = synthetic(3);
    let opts = EvalOptions {
        train: TrainOptions { weighting: ppr_core::personalize::WeightSource::HoldOut, ..TrainOptions::default() },
        ..EvalOptions::default()
    };
    let res = run_evaluation(&rows, &small_grid(), &opts).unwrap();
    assert_eq!(res.report.metadata.weighting, "hold_out");
}

proptest! {
    #[test]
    fn folds_partition_the_instances(problems in 1u32..6, instances in 5u32..12, k in 2usize..6) {
        let all = keys(problems, instances);
        let spec = make_stratified_folds(&all, k).unwrap();
        let mut seen: Vec<(u32, u32)> = spec.folds.iter().flatten().copied().collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, all);
        for (t, fold) in spec.folds.iter().enumerate() {
            prop_assert_eq!(fold.len(), problems as usize * spec.instance_ids[t].len());
        }
    }

    #[test]
    fn advantage_is_antisymmetric(v in proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0), 1..24)) {
        let a: BTreeMap<u32, f64> = v.iter().enumerate().map(|(i, p)| (i as u32, p.0)).collect();
        let b: BTreeMap<u32, f64> = v.iter().enumerate().map(|(i, p)| (i as u32, p.1)).collect();
        let ab = relative_advantage(&a, &b).unwrap();
        let ba = relative_advantage(&b, &a).unwrap();
        for (p, x) in &ab {
            prop_assert_eq!(*x, -ba[p]);
        }
        prop_assert!(relative_advantage(&a, &a).unwrap().values().all(|x| *x == 0.0));
    }
}

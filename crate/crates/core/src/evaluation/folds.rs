use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Instance-stratified folds: every fold holds the same instance ids of every
/// problem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSpec {
    /// Instance ids assigned to each fold.
    pub instance_ids: Vec<Vec<u32>>,
    /// (problem_id, instance_id) keys of each fold, sorted.
    pub folds: Vec<Vec<(u32, u32)>>,
}

impl FoldSpec {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn fold_of_instance(&self, instance_id: u32) -> Option<usize> {
        self.instance_ids.iter().position(|ids| ids.contains(&instance_id))
    }

    /// Instance ids outside fold `t`.
    pub fn training_instances(&self, t: usize) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .instance_ids
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != t)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Sorted distinct instance ids are dealt to the folds in turn, so ids
/// `1..=k` put instance `t` alone in fold `t`.
pub fn make_stratified_folds(keys: &[(u32, u32)], k: usize) -> Result<FoldSpec> {
    if k < 2 {
        return Err(Error::contract("need at least two folds"));
    }
    let mut by_problem: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for &(p, i) in keys {
        if !by_problem.entry(p).or_default().insert(i) {
            return Err(Error::data(format!("duplicate row for problem {p} instance {i}")));
        }
    }
    let all: BTreeSet<u32> = by_problem.values().flatten().copied().collect();
    for (p, ids) in &by_problem {
        if let Some(missing) = all.difference(ids).next() {
            return Err(Error::data(format!("problem {p} is missing instance {missing}")));
        }
    }
    if all.len() < k {
        return Err(Error::data(format!(
            "{} distinct instance ids cannot fill {k} folds",
            all.len()
        )));
    }
    let mut instance_ids = vec![Vec::new(); k];
    for (j, id) in all.iter().enumerate() {
        instance_ids[j % k].push(*id);
    }
    let folds = instance_ids
        .iter()
        .map(|ids| {
            by_problem
                .keys()
                .flat_map(|&p| ids.iter().map(move |&i| (p, i)))
                .collect::<Vec<_>>()
        })
        .map(|mut f: Vec<(u32, u32)>| {
            f.sort_unstable();
            f
        })
        .collect();
    Ok(FoldSpec { instance_ids, folds })
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Label, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.75,
            seed: 0,
        }
    }
}

fn class_indices(labels: &[Label], label: Label) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == label)
        .map(|(i, _)| i)
        .collect()
}

/// Random per-class partition: `round(train_fraction * class_count)` rows
/// of every class go to the training part. Both parts are returned in
/// ascending index order.
pub fn stratified_split_indices(labels: &[Label], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must lie in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in [Label::Stress, Label::Neutral] {
        let mut idx = class_indices(labels, label);
        if idx.is_empty() {
            return Err(Error::Stratification(format!("class {label} is absent")));
        }
        let n_train = (spec.train_fraction * idx.len() as f64).round() as usize;
        if n_train == 0 || n_train == idx.len() {
            return Err(Error::Stratification(format!(
                "class {label} has {} rows; cannot place rows in both parts at fraction {}",
                idx.len(),
                spec.train_fraction
            )));
        }
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(data: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_split_indices(&data.labels(), spec)?;
    Ok((data.select(&train), data.select(&test)))
}

/// Stratified `k`-fold assignment: each class is shuffled and dealt
/// round-robin over the folds. Returns the row indices of every fold.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::Config(format!("{} rows cannot fill {k} folds", labels.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for label in [Label::Stress, Label::Neutral] {
        let mut idx = class_indices(labels, label);
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in folds.iter_mut() {
        f.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(stress: usize, neutral: usize) -> Vec<Label> {
        let mut v = vec![Label::Stress; stress];
        v.extend(vec![Label::Neutral; neutral]);
        v
    }

    fn count(labels: &[Label], idx: &[usize], l: Label) -> usize {
        idx.iter().filter(|&&i| labels[i] == l).count()
    }

    #[test]
    fn four_rows_half_split() {
        let l = labels(2, 2);
        let (tr, te) = stratified_split_indices(&l, &SplitSpec { train_fraction: 0.5, seed: 3 }).unwrap();
        assert_eq!(count(&l, &tr, Label::Stress), 1);
        assert_eq!(count(&l, &tr, Label::Neutral), 1);
        assert_eq!(count(&l, &te, Label::Stress), 1);
        assert_eq!(count(&l, &te, Label::Neutral), 1);
    }

    #[test]
    fn seeds_change_assignment_not_counts() {
        let l = labels(40, 25);
        let mut seen = std::collections::HashSet::new();
        for seed in 0..100 {
            let (tr, te) = stratified_split_indices(&l, &SplitSpec { train_fraction: 0.75, seed }).unwrap();
            assert_eq!(count(&l, &tr, Label::Stress), 30);
            assert_eq!(count(&l, &tr, Label::Neutral), 19);
            assert_eq!(tr.len() + te.len(), l.len());
            let mut all: Vec<usize> = tr.iter().chain(&te).copied().collect();
            all.sort_unstable();
            assert!(all.iter().enumerate().all(|(i, &v)| i == v));
            seen.insert(tr);
        }
        assert!(seen.len() > 90);
    }

    #[test]
    fn absent_class_is_error() {
        let l = labels(10, 0);
        assert!(matches!(stratified_split_indices(&l, &SplitSpec::default()), Err(Error::Stratification(_))));
    }

    #[test]
    fn folds_partition_rows() {
        let l = labels(23, 17);
        let folds = stratified_folds(&l, 5, 1).unwrap();
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 40);
        for f in &folds {
            assert_eq!(f.len(), 8);
            let s = count(&l, f, Label::Stress);
            assert!((4..=5).contains(&s));
        }
        assert!(stratified_folds(&l, 1, 0).is_err());
    }
}

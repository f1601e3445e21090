//! Seeded stratified partitioning of feature sets.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::label::Label;
use crate::pipeline::FeatureSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("class {label} has {count} samples, need at least {need}")]
    ClassTooSmall {
        label: Label,
        count: usize,
        need: usize,
    },
    #[error("fold count {0} must be at least 2")]
    TooFewFolds(usize),
}

fn shuffle(v: &mut [usize], rng: &mut ChaCha8Rng) {
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
}

fn class_indices(labels: &[Label]) -> (Vec<usize>, Vec<usize>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match l {
            Label::Positive => pos.push(i),
            Label::Negative => neg.push(i),
        }
    }
    (pos, neg)
}

/// Random half/half split performed independently within each class.
///
/// The same seed always produces the same partition; an odd class count puts
/// the extra sample in the training half.
pub fn stratified_split(
    fs: &FeatureSet,
    seed: u64,
) -> Result<(FeatureSet, FeatureSet), SplitError> {
    let (pos, neg) = class_indices(&fs.labels);
    for (label, class) in [(Label::Positive, &pos), (Label::Negative, &neg)] {
        if class.len() < 2 {
            return Err(SplitError::ClassTooSmall {
                label,
                count: class.len(),
                need: 2,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [pos, neg] {
        let mut idx = class;
        shuffle(&mut idx, &mut rng);
        let take = idx.len().div_ceil(2);
        train.extend_from_slice(&idx[..take]);
        test.extend_from_slice(&idx[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((fs.select(&train), fs.select(&test)))
}

/// Fold assignment for seeded stratified k-fold cross-validation.
///
/// Entry `i` is the fold holding sample `i`. Each class is shuffled and dealt
/// round-robin, so per-fold class counts differ by at most one; requiring
/// `folds <= min(class count)` keeps every fold and every training
/// complement populated with both classes.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Result<Vec<usize>, SplitError> {
    if folds < 2 {
        return Err(SplitError::TooFewFolds(folds));
    }
    let (pos, neg) = class_indices(labels);
    for (label, class) in [(Label::Positive, &pos), (Label::Negative, &neg)] {
        if class.len() < folds {
            return Err(SplitError::ClassTooSmall {
                label,
                count: class.len(),
                need: folds,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = alloc::vec![0usize; labels.len()];
    for class in [pos, neg] {
        let mut idx = class;
        shuffle(&mut idx, &mut rng);
        for (k, i) in idx.into_iter().enumerate() {
            fold_of[i] = k % folds;
        }
    }
    Ok(fold_of)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phog::{PhogOptions, PhogParams};
    use crate::pipeline::Preproc;
    use alloc::format;
    use alloc::string::String;
    use alloc::vec::Vec;

    fn toy_set(pos: usize, neg: usize) -> FeatureSet {
        let n = pos + neg;
        FeatureSet {
            ids: (0..n).map(|i| format!("s{i}")).collect::<Vec<String>>(),
            features: (0..n).map(|i| alloc::vec![i as f64]).collect(),
            labels: (0..n)
                .map(|i| {
                    if i < pos {
                        Label::Positive
                    } else {
                        Label::Negative
                    }
                })
                .collect(),
            params: PhogParams::default(),
            preproc: Preproc::default(),
            options: PhogOptions::standard(),
        }
    }

    #[test]
    fn even_split_is_half_half() {
        let fs = toy_set(4, 4);
        let (train, test) = stratified_split(&fs, 7).unwrap();
        assert_eq!(train.class_counts(), (2, 2));
        assert_eq!(test.class_counts(), (2, 2));
    }

    #[test]
    fn odd_class_extra_goes_to_train() {
        let fs = toy_set(5, 4);
        let (train, test) = stratified_split(&fs, 7).unwrap();
        assert_eq!(train.class_counts(), (3, 2));
        assert_eq!(test.class_counts(), (2, 2));
    }

    #[test]
    fn split_is_a_partition() {
        let fs = toy_set(9, 6);
        let (train, test) = stratified_split(&fs, 123).unwrap();
        let mut ids: Vec<&String> = train.ids.iter().chain(test.ids.iter()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), fs.len());
    }

    #[test]
    fn same_seed_same_partition() {
        let fs = toy_set(8, 8);
        let a = stratified_split(&fs, 42).unwrap();
        let b = stratified_split(&fs, 42).unwrap();
        assert_eq!(a.0.ids, b.0.ids);
        assert_eq!(a.1.ids, b.1.ids);
        let mut seen_different = false;
        for seed in 0..20 {
            let c = stratified_split(&fs, seed).unwrap();
            if c.0.ids != a.0.ids {
                seen_different = true;
            }
        }
        assert!(seen_different);
    }

    #[test]
    fn tiny_class_rejected() {
        let fs = toy_set(1, 4);
        assert!(matches!(
            stratified_split(&fs, 0),
            Err(SplitError::ClassTooSmall { .. })
        ));
    }

    #[test]
    fn folds_cover_all_samples_stratified() {
        let fs = toy_set(11, 7);
        let fold_of = stratified_folds(&fs.labels, 3, 5).unwrap();
        assert_eq!(fold_of.len(), 18);
        for fold in 0..3 {
            let pos = fs
                .labels
                .iter()
                .zip(&fold_of)
                .filter(|(l, f)| **l == Label::Positive && **f == fold)
                .count();
            let neg = fs
                .labels
                .iter()
                .zip(&fold_of)
                .filter(|(l, f)| **l == Label::Negative && **f == fold)
                .count();
            assert!((3..=4).contains(&pos), "fold {fold}: {pos} positives");
            assert!((2..=3).contains(&neg), "fold {fold}: {neg} negatives");
        }
    }

    #[test]
    fn folds_require_enough_samples() {
        let fs = toy_set(4, 2);
        assert!(matches!(
            stratified_folds(&fs.labels, 3, 0),
            Err(SplitError::ClassTooSmall { .. })
        ));
        assert!(matches!(
            stratified_folds(&fs.labels, 1, 0),
            Err(SplitError::TooFewFolds(1))
        ));
    }
}

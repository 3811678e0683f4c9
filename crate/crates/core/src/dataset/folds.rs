use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Label;
use crate::error::DataError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub folds: Vec<Fold>,
}

impl FoldSplit {
    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

/// Stratified `k`-fold split over examples with the given labels.
///
/// Positives and negatives are shuffled separately, laid end to end and
/// dealt round-robin, so fold sizes differ by at most one and every fold's
/// class counts are within one of the ideal share.
pub fn make_folds(labels: &[Label], k: usize, seed: u64) -> Result<FoldSplit, DataError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(DataError::InvalidFolds { n, k });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i] == Label::Positive).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| labels[i] == Label::Negative).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let mut tests = vec![Vec::new(); k];
    for (slot, idx) in pos.into_iter().chain(neg).enumerate() {
        tests[slot % k].push(idx);
    }
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train = (0..n).filter(|&i| !in_test[i]).collect();
            Fold { train, test }
        })
        .collect();
    Ok(FoldSplit { folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn alternating(n: usize) -> Vec<Label> {
        (0..n).map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative }).collect()
    }

    #[test]
    fn ten_into_five() {
        let split = make_folds(&alternating(10), 5, 1).unwrap();
        assert_eq!(split.len(), 5);
        assert!(split.folds.iter().all(|f| f.test.len() == 2 && f.train.len() == 8));
    }

    #[test]
    fn nine_into_five() {
        let split = make_folds(&alternating(9), 5, 3).unwrap();
        let mut sizes: Vec<usize> = split.folds.iter().map(|f| f.test.len()).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![2, 2, 2, 2, 1]);
    }

    #[test]
    fn deterministic_per_seed() {
        let labels = alternating(31);
        assert_eq!(make_folds(&labels, 5, 42).unwrap(), make_folds(&labels, 5, 42).unwrap());
        assert_ne!(make_folds(&labels, 5, 42).unwrap(), make_folds(&labels, 5, 43).unwrap());
    }

    #[test]
    fn bad_fold_counts() {
        assert!(make_folds(&alternating(4), 5, 0).is_err());
        assert!(make_folds(&alternating(4), 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn partition_and_stratification(
            labels in prop::collection::vec(prop::bool::ANY, 2..120),
            k in 2usize..8,
            seed in any::<u64>(),
        ) {
            prop_assume!(k <= labels.len());
            let labels: Vec<Label> = labels
                .into_iter()
                .map(|b| if b { Label::Positive } else { Label::Negative })
                .collect();
            let n = labels.len();
            let split = make_folds(&labels, k, seed).unwrap();
            let mut seen = vec![0usize; n];
            let total_pos = labels.iter().filter(|&&l| l == Label::Positive).count() as f64;
            let sizes: Vec<usize> = split.folds.iter().map(|f| f.test.len()).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for fold in &split.folds {
                prop_assert_eq!(fold.train.len() + fold.test.len(), n);
                for &i in &fold.test {
                    seen[i] += 1;
                    prop_assert!(fold.train.binary_search(&i).is_err());
                }
                let pos = fold.test.iter().filter(|&&i| labels[i] == Label::Positive).count() as f64;
                prop_assert!((pos - total_pos / k as f64).abs() <= 1.0);
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}

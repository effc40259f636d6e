use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, SplitTag};
use crate::error::{Result, RtoError};

/// Seeded shuffle into equal thirds; the remainder goes to the test split.
pub fn three_way_split(dataset: &Dataset, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let n = dataset.len();
    if n < 3 {
        return Err(RtoError::InvalidParameter(format!(
            "need at least 3 examples to split, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let third = n / 3;
    Ok((
        dataset.subset(&idx[..third], SplitTag::TrainPost),
        dataset.subset(&idx[third..2 * third], SplitTag::Validation),
        dataset.subset(&idx[2 * third..], SplitTag::Test),
    ))
}

/// Errors if any id appears in both datasets.
pub fn check_disjoint(a: &Dataset, b: &Dataset) -> Result<()> {
    let ids: HashSet<&str> = a.examples.iter().map(|e| e.id.as_str()).collect();
    let shared: Vec<&str> = b
        .examples
        .iter()
        .map(|e| e.id.as_str())
        .filter(|id| ids.contains(id))
        .take(5)
        .collect();
    if shared.is_empty() {
        Ok(())
    } else {
        Err(RtoError::Disjointness(format!("shared ids include {shared:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ScoredExample;
    use proptest::prelude::*;

    fn dataset(n: usize) -> Dataset {
        let ex = (0..n)
            .map(|i| ScoredExample::new(format!("e{i}"), 0.0, 1, None, None).unwrap())
            .collect();
        Dataset::new(ex, 1, "test")
    }

    #[test]
    fn sizes() {
        let (a, b, c) = three_way_split(&dataset(9), 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (3, 3, 3));
        let (a, b, c) = three_way_split(&dataset(10), 1).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (3, 3, 4));
        assert_eq!(a.split, Some(SplitTag::TrainPost));
        assert_eq!(c.split, Some(SplitTag::Test));
        assert!(three_way_split(&dataset(2), 1).is_err());
    }

    #[test]
    fn same_seed_same_split() {
        let d = dataset(50);
        assert_eq!(three_way_split(&d, 9).unwrap(), three_way_split(&d, 9).unwrap());
        assert_ne!(three_way_split(&d, 9).unwrap().0, three_way_split(&d, 10).unwrap().0);
    }

    #[test]
    fn overlap_detected() {
        let d = dataset(6);
        assert!(matches!(check_disjoint(&d, &d), Err(RtoError::Disjointness(_))));
    }

    proptest! {
        #[test]
        fn splits_partition_the_data(n in 3usize..200, seed in any::<u64>()) {
            let d = dataset(n);
            let (a, b, c) = three_way_split(&d, seed).unwrap();
            prop_assert!(check_disjoint(&a, &b).is_ok());
            prop_assert!(check_disjoint(&a, &c).is_ok());
            prop_assert!(check_disjoint(&b, &c).is_ok());
            let mut all: Vec<String> = a.examples.iter().chain(&b.examples).chain(&c.examples).map(|e| e.id.clone()).collect();
            all.sort();
            let mut orig: Vec<String> = d.examples.iter().map(|e| e.id.clone()).collect();
            orig.sort();
            prop_assert_eq!(all, orig);
        }
    }
}

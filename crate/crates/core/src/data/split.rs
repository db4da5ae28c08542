//! Index views over a dataset: the train/UQ split, bootstrap training
//! subsets, the target-sorted UQ blocks and the empirical distributions
//! drawn from them.

use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{DtbError, Result};
use crate::rng;

/// `floor(fraction * n)` tolerant of representation error in `fraction`
/// (e.g. `0.29 * 100` evaluates just below 29).
pub fn fraction_count(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Ordered row indices into a parent dataset of `parent_len` rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSet {
    indices: Vec<usize>,
    parent_len: usize,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, parent_len: usize) -> Result<Self> {
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= parent_len {
                return Err(DtbError::data(format!(
                    "index {i} out of range for {parent_len} rows"
                )));
            }
            if !seen.insert(i) {
                return Err(DtbError::data(format!("duplicate index {i}")));
            }
        }
        Ok(Self {
            indices,
            parent_len,
        })
    }

    /// Every row of a parent of `n` rows, in order.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            parent_len: n,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn parent_len(&self) -> usize {
        self.parent_len
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Re-indexes `positions` (into this set) as a subset of the same parent.
    fn pick(&self, positions: &[usize]) -> Self {
        Self {
            indices: positions.iter().map(|&p| self.indices[p]).collect(),
            parent_len: self.parent_len,
        }
    }
}

/// Randomly splits all rows into disjoint train and UQ sets with
/// `|uq| = floor(uq_fraction * rows)`. Both sets are returned in row order.
pub fn split_train_uq(data: &Dataset, uq_fraction: f64, seed: u64) -> Result<(IndexSet, IndexSet)> {
    split_rows(data.len(), uq_fraction, seed)
}

/// Index-only form of [`split_train_uq`]: returns `(rest, held)` where
/// `held` has `floor(fraction * n)` rows.
pub fn split_rows(n: usize, fraction: f64, seed: u64) -> Result<(IndexSet, IndexSet)> {
    if n == 0 {
        return Err(DtbError::data("cannot split an empty dataset"));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(DtbError::config(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng::shuffle(&mut rng::stream(seed), &mut order);
    let n_held = fraction_count(fraction, n);
    let mut held = order[..n_held].to_vec();
    let mut rest = order[n_held..].to_vec();
    held.sort_unstable();
    rest.sort_unstable();
    Ok((
        IndexSet {
            indices: rest,
            parent_len: n,
        },
        IndexSet {
            indices: held,
            parent_len: n,
        },
    ))
}

/// Draws `m` training subsets of size `floor(data_fraction * |train|)`,
/// each without replacement; subsets are independent and may overlap.
pub fn subsample_train_subsets(
    train: &IndexSet,
    m: usize,
    data_fraction: f64,
    seed: u64,
) -> Result<Vec<IndexSet>> {
    if m == 0 {
        return Err(DtbError::config("model count m must be at least 1"));
    }
    if !(data_fraction > 0.0 && data_fraction <= 1.0) {
        return Err(DtbError::config(format!(
            "data fraction must lie in (0, 1], got {data_fraction}"
        )));
    }
    let size = fraction_count(data_fraction, train.len()).min(train.len());
    if size == 0 {
        return Err(DtbError::config(format!(
            "data fraction {data_fraction} of {} training rows yields empty subsets",
            train.len()
        )));
    }
    Ok((0..m)
        .map(|i| {
            let mut stream = rng::stream(rng::derive_seed(seed, &[i as u64]));
            let mut positions = rng::sample_without_replacement(&mut stream, train.len(), size);
            positions.sort_unstable();
            train.pick(&positions)
        })
        .collect())
}

/// UQ rows sorted by target and cut into `n` equal contiguous blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqPartition {
    sorted_order: Vec<usize>,
    block_size: usize,
    n: usize,
    parent_len: usize,
}

impl UqPartition {
    pub fn n_blocks(&self) -> usize {
        self.n
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// UQ rows ordered by (target, row index).
    pub fn sorted_order(&self) -> &[usize] {
        &self.sorted_order
    }

    pub fn block_range(&self, j: usize) -> Range<usize> {
        j * self.block_size..(j + 1) * self.block_size
    }

    /// Rows of block `j`, ascending in target.
    pub fn block(&self, j: usize) -> &[usize] {
        &self.sorted_order[self.block_range(j)]
    }

    /// Highest-target rows left out of every block.
    pub fn unassigned(&self) -> &[usize] {
        &self.sorted_order[self.n * self.block_size..]
    }

    pub fn parent_len(&self) -> usize {
        self.parent_len
    }
}

/// Sorts the UQ rows by target (ties by row index) and cuts them into `n`
/// blocks of `floor(|uq| / n)` rows. The `|uq| mod n` highest-target rows
/// are left unassigned.
pub fn sort_and_partition_uq(data: &Dataset, uq: &IndexSet, n: usize) -> Result<UqPartition> {
    if n == 0 {
        return Err(DtbError::config("block count n must be at least 1"));
    }
    if n > uq.len() {
        return Err(DtbError::config(format!(
            "block count n = {n} exceeds the {} UQ rows",
            uq.len()
        )));
    }
    let mut sorted_order = uq.indices().to_vec();
    sorted_order.sort_by(|&a, &b| data.y(a).total_cmp(&data.y(b)).then(a.cmp(&b)));
    Ok(UqPartition {
        block_size: uq.len() / n,
        sorted_order,
        n,
        parent_len: uq.parent_len(),
    })
}

/// Uniform distribution over `s` rows drawn from one UQ block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub block: usize,
    pub support: IndexSet,
}

impl EmpiricalDistribution {
    pub fn weight(&self) -> f64 {
        1.0 / self.support.len() as f64
    }
}

/// Draws `s` rows without replacement from every block.
pub fn draw_empirical_distributions(
    partition: &UqPartition,
    s: usize,
    seed: u64,
) -> Result<Vec<EmpiricalDistribution>> {
    if s == 0 {
        return Err(DtbError::config("support size s must be at least 1"));
    }
    if s > partition.block_size() {
        return Err(DtbError::config(format!(
            "support size s = {s} exceeds block size {}",
            partition.block_size()
        )));
    }
    let mut stream = rng::stream(seed);
    Ok((0..partition.n_blocks())
        .map(|j| {
            let block = partition.block(j);
            let mut positions = rng::sample_without_replacement(&mut stream, block.len(), s);
            positions.sort_unstable();
            EmpiricalDistribution {
                block: j,
                support: IndexSet {
                    indices: positions.iter().map(|&p| block[p]).collect(),
                    parent_len: partition.parent_len(),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dataset_with_targets(targets: Vec<f64>) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..targets.len()).map(|i| vec![i as f64]).collect();
        Dataset::from_rows(&rows, targets).unwrap()
    }

    #[test]
    fn split_sizes_follow_floor() {
        let data = dataset_with_targets(vec![0.0; 10]);
        let (train, uq) = split_train_uq(&data, 0.3, 99).unwrap();
        assert_eq!(uq.len(), 3);
        assert_eq!(train.len(), 7);
        assert!(uq.indices().iter().all(|i| !train.indices().contains(i)));
    }

    #[test]
    fn housing_sized_split() {
        let (train, uq) = split_rows(20536, 0.33001, 1).unwrap();
        assert_eq!(uq.len(), 6777);
        assert_eq!(train.len(), 13759);
    }

    #[test]
    fn split_is_seed_deterministic() {
        let a = split_rows(50, 0.4, 5).unwrap();
        assert_eq!(a, split_rows(50, 0.4, 5).unwrap());
        assert_ne!(a, split_rows(50, 0.4, 6).unwrap());
    }

    #[test]
    fn split_rejects_bad_fraction() {
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(split_rows(10, f, 0), Err(DtbError::Config(_))));
        }
    }

    #[test]
    fn split_soundness_exhaustive_small() {
        for n in [1usize, 2, 3, 7, 31, 100, 257, 1000] {
            for (k, f) in [0.01, 0.2, 0.5, 0.77, 0.99].into_iter().enumerate() {
                let (train, uq) = split_rows(n, f, k as u64 + n as u64).unwrap();
                let mut all: Vec<usize> = train.indices().iter().chain(uq.indices()).copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..n).collect::<Vec<_>>(), "n={n} f={f}");
                assert_eq!(uq.len(), fraction_count(f, n));
            }
        }
    }

    #[test]
    fn subsets_have_fraction_size() {
        let train = IndexSet::full(100);
        let subsets = subsample_train_subsets(&train, 20, 0.5, 3).unwrap();
        assert_eq!(subsets.len(), 20);
        assert!(subsets.iter().all(|s| s.len() == 50));
        assert_ne!(subsets[0], subsets[1]);
    }

    #[test]
    fn full_fraction_subset_is_whole_train() {
        let (train, _) = split_rows(40, 0.25, 8).unwrap();
        for subset in subsample_train_subsets(&train, 3, 1.0, 1).unwrap() {
            assert_eq!(subset, train);
        }
    }

    #[test]
    fn weak_mode_subset_size() {
        let train = IndexSet::full(13759);
        let subsets = subsample_train_subsets(&train, 2, 0.005, 0).unwrap();
        assert_eq!(subsets[0].len(), 68);
    }

    #[test]
    fn empty_subsets_are_rejected() {
        let train = IndexSet::full(10);
        assert!(subsample_train_subsets(&train, 3, 0.05, 0).is_err());
        assert!(subsample_train_subsets(&train, 0, 0.5, 0).is_err());
    }

    #[test]
    fn partition_hand_example() {
        let data = dataset_with_targets(vec![5.0, 1.0, 3.0, 2.0]);
        let part = sort_and_partition_uq(&data, &IndexSet::full(4), 2).unwrap();
        assert_eq!(part.sorted_order(), &[1, 3, 2, 0]);
        assert_eq!(part.block(0), &[1, 3]);
        assert_eq!(part.block(1), &[2, 0]);
        assert!(part.unassigned().is_empty());
    }

    #[test]
    fn partition_ties_keep_row_order() {
        let data = dataset_with_targets(vec![2.0; 6]);
        let uq = IndexSet::new(vec![5, 1, 3, 0], 6).unwrap();
        let part = sort_and_partition_uq(&data, &uq, 2).unwrap();
        assert_eq!(part.block(0), &[0, 1]);
        assert_eq!(part.block(1), &[3, 5]);
    }

    #[test]
    fn housing_sized_partition_and_draw() {
        let targets: Vec<f64> = (0..6777).map(|i| ((i * 7919) % 6777) as f64).collect();
        let data = dataset_with_targets(targets);
        let part = sort_and_partition_uq(&data, &IndexSet::full(6777), 100).unwrap();
        assert_eq!(part.block_size(), 67);
        assert_eq!(part.unassigned().len(), 77);
        let dists = draw_empirical_distributions(&part, 13, 4).unwrap();
        let total: usize = dists.iter().map(|d| d.support.len()).sum();
        assert_eq!(total, 1300);
        let ratio = total as f64 / 6777.0;
        assert!((ratio - 0.19).abs() < 0.005);
    }

    #[test]
    fn partition_rejects_too_many_blocks() {
        let data = dataset_with_targets(vec![1.0, 2.0]);
        assert!(sort_and_partition_uq(&data, &IndexSet::full(2), 3).is_err());
    }

    #[test]
    fn exhaustive_draw_covers_block() {
        let data = dataset_with_targets((0..12).map(f64::from).collect());
        let part = sort_and_partition_uq(&data, &IndexSet::full(12), 3).unwrap();
        let dists = draw_empirical_distributions(&part, 4, 0).unwrap();
        for (j, d) in dists.iter().enumerate() {
            let mut block = part.block(j).to_vec();
            block.sort_unstable();
            assert_eq!(d.support.indices(), block.as_slice());
        }
        assert!(draw_empirical_distributions(&part, 5, 0).is_err());
    }

    #[test]
    fn draws_are_seeded() {
        let data = dataset_with_targets((0..400).map(f64::from).collect());
        let part = sort_and_partition_uq(&data, &IndexSet::full(400), 10).unwrap();
        let a = draw_empirical_distributions(&part, 8, 1).unwrap();
        assert_eq!(a, draw_empirical_distributions(&part, 8, 1).unwrap());
        assert_ne!(a, draw_empirical_distributions(&part, 8, 2).unwrap());
    }

    proptest! {
        #[test]
        fn blocks_monotone_and_supports_disjoint(
            targets in prop::collection::vec(-100.0f64..100.0, 4..200),
            n_frac in 0.01f64..1.0,
            s_frac in 0.01f64..1.0,
            seed in any::<u64>(),
        ) {
            let len = targets.len();
            let data = dataset_with_targets(targets);
            let n = ((n_frac * len as f64) as usize).clamp(1, len);
            let part = sort_and_partition_uq(&data, &IndexSet::full(len), n).unwrap();
            prop_assert!(part.unassigned().len() < n);
            for j in 0..n {
                let block = part.block(j);
                prop_assert!(block.windows(2).all(|w| data.y(w[0]) <= data.y(w[1])));
                if j + 1 < n {
                    let max_here = block.iter().map(|&i| data.y(i)).fold(f64::MIN, f64::max);
                    let min_next = part.block(j + 1).iter().map(|&i| data.y(i)).fold(f64::MAX, f64::min);
                    prop_assert!(max_here <= min_next);
                }
            }
            let s = ((s_frac * part.block_size() as f64) as usize).clamp(1, part.block_size());
            let dists = draw_empirical_distributions(&part, s, seed).unwrap();
            let mut seen = HashSet::new();
            for d in &dists {
                prop_assert_eq!(d.support.len(), s);
                for &i in d.support.indices() {
                    prop_assert!(part.block(d.block).contains(&i));
                    prop_assert!(seen.insert(i));
                }
            }
            prop_assert_eq!(seen.len(), n * s);
        }
    }
}

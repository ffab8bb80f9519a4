//! Sorting freshly cracked regions.
//!
//! After cracking, the smallest and largest keys of a region can be moved to
//! its two ends in one pass. Those two anchors define a line approximating
//! the region's CDF; every interior key is dropped at its predicted slot if
//! that slot is still free and spilled to a side bucket otherwise. The bucket
//! is sorted and merged back. Small regions use the standard library sort.

use std::ops::Range;

use crate::error::{LaiError, Result};
use crate::types::{Column, Key, Position};

/// Region length above which the learned path is used.
pub const DEFAULT_TAU: usize = 6000;

/// Line through two anchor points `(key, position)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointRegression {
    /// Positions per key unit.
    pub slope: f64,
    /// Predicted position of key 0.
    pub intercept: f64,
    anchor_key: Key,
    anchor_pos: f64,
}

impl TwoPointRegression {
    pub fn fit(low: (Key, Position), high: (Key, Position)) -> Self {
        let (lk, lp) = low;
        let (hk, hp) = high;
        let slope = if hk > lk {
            (hp as f64 - lp as f64) / (hk - lk) as f64
        } else {
            0.0
        };
        TwoPointRegression {
            slope,
            intercept: lp as f64 - slope * lk as f64,
            anchor_key: lk,
            anchor_pos: lp as f64,
        }
    }

    /// Predicted position; non-decreasing in `key`.
    #[inline]
    pub fn predict(&self, key: Key) -> f64 {
        let dx = key.saturating_sub(self.anchor_key) as f64;
        self.anchor_pos + self.slope * dx
    }
}

/// Counters for the two sort paths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SortStats {
    pub learned_path_count: u64,
    pub comparison_path_count: u64,
    /// Interior keys handled by the learned path.
    pub learned_keys: u64,
    /// Interior keys that went to the spill bucket.
    pub spilled_keys: u64,
}

impl SortStats {
    pub fn spill_fraction(&self) -> f64 {
        if self.learned_keys == 0 {
            0.0
        } else {
            self.spilled_keys as f64 / self.learned_keys as f64
        }
    }
}

/// Sorts `column[range]` with the learned path. The region's minimum must
/// already be at `range.start` and its maximum at `range.end - 1`.
pub fn learned_sort(
    column: &mut Column,
    range: Range<Position>,
    model: &TwoPointRegression,
    stats: &mut SortStats,
) -> Result<()> {
    column.check_range(&range)?;
    if range.len() < 2 {
        return Err(LaiError::precondition(
            "learned sort needs a region of at least two keys",
        ));
    }
    let (lo, hi) = (range.start, range.end - 1);
    let interior_len = range.len() - 2;
    let region = column.region_mut(range);
    debug_assert!(
        region
            .iter()
            .all(|&k| region[0] <= k && k <= region[region.len() - 1]),
        "learned sort anchors are not the region extremes"
    );
    stats.learned_path_count += 1;
    if interior_len == 0 {
        return Ok(());
    }
    let interior = &mut region[1..=interior_len];

    let keys = interior.to_vec();
    let mut occupied = vec![false; interior_len];
    let mut spill = Vec::new();
    let last_slot = (interior_len - 1) as f64;
    for key in keys {
        // Clamp into the interior; the cast saturates for out-of-range values.
        let slot = (model.predict(key) - (lo + 1) as f64).clamp(0.0, last_slot) as usize;
        debug_assert!(lo + 1 + slot < hi);
        if occupied[slot] {
            spill.push(key);
        } else {
            occupied[slot] = true;
            interior[slot] = key;
        }
    }
    spill.sort_unstable();

    // Compact placed keys to the front. They are already ordered: each sits
    // at its own predicted slot and prediction is monotone in the key.
    let mut placed = 0;
    for i in 0..interior_len {
        if occupied[i] {
            interior[placed] = interior[i];
            placed += 1;
        }
    }
    debug_assert!(interior[..placed].windows(2).all(|w| w[0] <= w[1]));

    // Merge from the back; equal keys take the spill side last.
    let (mut i, mut j, mut k) = (placed, spill.len(), interior_len);
    while j > 0 {
        if i > 0 && interior[i - 1] > spill[j - 1] {
            interior[k - 1] = interior[i - 1];
            i -= 1;
        } else {
            interior[k - 1] = spill[j - 1];
            j -= 1;
        }
        k -= 1;
    }

    stats.learned_keys += interior_len as u64;
    stats.spilled_keys += (interior_len - placed) as u64;
    column.record_writes(2 * interior_len as u64);
    Ok(())
}

/// Sorts `column[range]`, choosing the learned path when the region is
/// longer than `tau` and the standard library sort otherwise.
pub fn adaptive_sort(
    column: &mut Column,
    range: Range<Position>,
    tau: usize,
    stats: &mut SortStats,
) -> Result<()> {
    column.check_range(&range)?;
    let len = range.len();
    if len <= tau.max(1) {
        stats.comparison_path_count += 1;
        column.region_mut(range).sort_unstable();
        column.record_writes(len as u64);
        return Ok(());
    }
    let (start, last) = (range.start, range.end - 1);
    let region = column.region_mut(range.clone());
    move_extremes_to_ends(region);
    let model = TwoPointRegression::fit((region[0], start), (region[len - 1], last));
    column.record_writes(4);
    learned_sort(column, range, &model, stats)
}

/// Swaps the minimum to the front and the maximum to the back.
fn move_extremes_to_ends(region: &mut [Key]) {
    let n = region.len();
    if n < 2 {
        return;
    }
    let mut min_i = 0;
    let mut max_i = 0;
    for (i, &k) in region.iter().enumerate() {
        if k < region[min_i] {
            min_i = i;
        }
        if k > region[max_i] {
            max_i = i;
        }
    }
    region.swap(0, min_i);
    if max_i == 0 {
        max_i = min_i;
    }
    region.swap(n - 1, max_i);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::sorted_multiset;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn run_learned(mut data: Vec<Key>) -> (Vec<Key>, SortStats) {
        move_extremes_to_ends(&mut data);
        let n = data.len();
        let model = TwoPointRegression::fit((data[0], 0), (data[n - 1], n - 1));
        let mut c = Column::new(data);
        let mut stats = SortStats::default();
        learned_sort(&mut c, 0..n, &model, &mut stats).unwrap();
        (c.into_inner(), stats)
    }

    #[test]
    fn regression_passes_through_anchors() {
        let m = TwoPointRegression::fit((100, 10), (300, 50));
        assert_eq!(m.predict(100), 10.0);
        assert_eq!(m.predict(300), 50.0);
        assert_eq!(m.slope, 0.2);
        assert_eq!(m.intercept, -10.0);
    }

    #[test]
    fn contiguous_keys_never_spill() {
        let mut data: Vec<Key> = (500..1500).collect();
        data.shuffle(&mut ChaCha8Rng::seed_from_u64(2));
        let (out, stats) = run_learned(data);
        assert_eq!(out, (500..1500).collect::<Vec<_>>());
        assert_eq!(stats.spilled_keys, 0);
        assert_eq!(stats.spill_fraction(), 0.0);
    }

    #[test]
    fn two_keys_are_already_sorted() {
        let (out, stats) = run_learned(vec![9, 3]);
        assert_eq!(out, vec![3, 9]);
        assert_eq!(stats.learned_keys, 0);
    }

    #[test]
    fn ten_thousand_random_keys() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let data: Vec<Key> = (0..10_000)
            .map(|_| rng.random_range(0..1_000_000_000))
            .collect();
        let expected = sorted_multiset(&data);
        let (out, stats) = run_learned(data);
        assert_eq!(out, expected);
        assert!(stats.spilled_keys > 0);
    }

    #[test]
    fn all_equal_keys() {
        let (out, _) = run_learned(vec![4; 50]);
        assert_eq!(out, vec![4; 50]);
    }

    #[test]
    fn path_selection_at_tau() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for (len, learned) in [(100, false), (6000, false), (6001, true)] {
            let data: Vec<Key> = (0..len).map(|_| rng.random()).collect();
            let expected = sorted_multiset(&data);
            let mut c = Column::new(data);
            let mut stats = SortStats::default();
            adaptive_sort(&mut c, 0..len, DEFAULT_TAU, &mut stats).unwrap();
            assert_eq!(c.as_slice(), &expected[..]);
            assert_eq!(stats.learned_path_count, learned as u64, "len {len}");
            assert_eq!(stats.comparison_path_count, !learned as u64, "len {len}");
        }
    }

    #[test]
    fn both_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8000);
        let data: Vec<Key> = (0..8000).map(|_| rng.random_range(0..50_000)).collect();
        let mut a = Column::new(data.clone());
        let mut b = Column::new(data);
        let mut stats = SortStats::default();
        adaptive_sort(&mut a, 0..8000, 0, &mut stats).unwrap();
        adaptive_sort(&mut b, 0..8000, usize::MAX, &mut stats).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
        assert_eq!(
            (stats.learned_path_count, stats.comparison_path_count),
            (1, 1)
        );
    }

    #[test]
    fn canaries_survive() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut data = vec![u64::MAX; 3];
        data.extend((0..5000).map(|_| rng.random_range(1000..2000u64)));
        data.extend([0; 3]);
        let mut c = Column::new(data);
        let mut stats = SortStats::default();
        adaptive_sort(&mut c, 3..5003, 0, &mut stats).unwrap();
        assert_eq!(&c.as_slice()[..3], &[u64::MAX; 3]);
        assert_eq!(&c.as_slice()[5003..], &[0; 3]);
        assert!(c.as_slice()[3..5003].windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn undersized_region_is_rejected() {
        let mut c = Column::new(vec![1]);
        let m = TwoPointRegression::fit((1, 0), (1, 0));
        assert!(learned_sort(&mut c, 0..1, &m, &mut SortStats::default()).is_err());
    }

    proptest! {
        #[test]
        fn learned_matches_comparison_sort(data in prop::collection::vec(any::<u64>(), 2..3000)) {
            let expected = sorted_multiset(&data);
            let (out, _) = run_learned(data);
            prop_assert_eq!(out, expected);
        }

        #[test]
        fn learned_handles_heavy_duplicates(data in prop::collection::vec(0u64..16, 2..3000)) {
            let expected = sorted_multiset(&data);
            let (out, _) = run_learned(data);
            prop_assert_eq!(out, expected);
        }
    }
}

//! Domain types shared by every engine: keys, the column being reorganized,
//! range queries, the query-case taxonomy and per-query statistics.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{LaiError, Result};

/// A key stored in the column.
pub type Key = u64;

/// A zero-based index into the column.
pub type Position = usize;

/// An inclusive range query `low <= x <= high`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RangeQuery {
    pub low: Key,
    pub high: Key,
}

impl RangeQuery {
    pub fn new(low: Key, high: Key) -> Result<Self> {
        if low > high {
            return Err(LaiError::InvalidQuery { low, high });
        }
        Ok(RangeQuery { low, high })
    }

    #[inline]
    pub fn contains(&self, key: Key) -> bool {
        self.low <= key && key <= self.high
    }
}

/// The in-place array being cracked and progressively sorted.
///
/// The length never changes and every mutation only reorders keys, so the
/// contents stay a permutation of the initial data. `writes` counts element
/// writes performed by cracking and sorting.
#[derive(Debug, Clone, Default)]
pub struct Column {
    data: Vec<Key>,
    writes: u64,
}

impl Column {
    pub fn new(data: Vec<Key>) -> Self {
        Column { data, writes: 0 }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[Key] {
        &self.data
    }

    #[inline]
    pub fn get(&self, pos: Position) -> Option<Key> {
        self.data.get(pos).copied()
    }

    /// Total element writes performed through [`Column::region_mut`].
    pub fn writes(&self) -> u64 {
        self.writes
    }

    pub fn check_range(&self, range: &Range<Position>) -> Result<()> {
        if range.start > range.end || range.end > self.data.len() {
            return Err(LaiError::OutOfBounds {
                start: range.start,
                end: range.end,
                len: self.data.len(),
            });
        }
        Ok(())
    }

    /// Mutable access to a region. The caller reports how many element
    /// writes it performed through `record_writes`.
    pub(crate) fn region_mut(&mut self, range: Range<Position>) -> &mut [Key] {
        &mut self.data[range]
    }

    pub(crate) fn record_writes(&mut self, n: u64) {
        self.writes += n;
    }

    pub fn into_inner(self) -> Vec<Key> {
        self.data
    }
}

impl From<Vec<Key>> for Column {
    fn from(data: Vec<Key>) -> Self {
        Column::new(data)
    }
}

/// How a query's endpoints relate to the sorted partitions that exist when
/// it arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseKind {
    /// Both endpoints in unsorted regions with sorted partitions between them.
    Case1i,
    /// Both endpoints in the same unsorted region.
    Case1ii,
    /// Both endpoints in one sorted partition.
    Case2,
    /// Endpoints in two different sorted partitions.
    Case3,
    /// Only the low endpoint is inside a sorted partition.
    Case4,
    /// Only the high endpoint is inside a sorted partition.
    Case5,
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [
        CaseKind::Case1i,
        CaseKind::Case1ii,
        CaseKind::Case2,
        CaseKind::Case3,
        CaseKind::Case4,
        CaseKind::Case5,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseKind::Case1i => "case1i",
            CaseKind::Case1ii => "case1ii",
            CaseKind::Case2 => "case2",
            CaseKind::Case3 => "case3",
            CaseKind::Case4 => "case4",
            CaseKind::Case5 => "case5",
        }
    }

    /// True for the two cases that crack an unsorted region on both ends.
    pub fn is_case1(self) -> bool {
        matches!(self, CaseKind::Case1i | CaseKind::Case1ii)
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseKind {
    type Err = LaiError;

    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| LaiError::Config(format!("unknown case `{s}`")))
    }
}

/// Bookkeeping for one executed query.
///
/// The result is the half-open position range `result`; an empty result is
/// an empty range located where matching keys would be.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryStats {
    pub query_index: usize,
    /// `None` for engines that have no case taxonomy.
    pub case: Option<CaseKind>,
    pub latency_ns: u64,
    pub result: Range<Position>,
}

/// Every key `x` with `q.low <= x <= q.high`, in column order.
pub fn naive_scan(data: &[Key], q: RangeQuery) -> Vec<Key> {
    data.iter().copied().filter(|&x| q.contains(x)).collect()
}

/// Sorted copy of `keys`, the canonical form for comparing result multisets.
pub fn sorted_multiset(keys: &[Key]) -> Vec<Key> {
    let mut v = keys.to_vec();
    v.sort_unstable();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scan_finds_walkthrough_range() {
        let mut data: Vec<Key> = (0..14).collect();
        data.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        let got = sorted_multiset(&naive_scan(&data, RangeQuery::new(9, 13).unwrap()));
        assert_eq!(got, vec![9, 10, 11, 12, 13]);
    }

    #[test]
    fn scan_empty_result() {
        assert!(naive_scan(&[5], RangeQuery::new(6, 7).unwrap()).is_empty());
    }

    #[test]
    fn scan_counts_shuffled_block() {
        let mut data: Vec<Key> = (0..1000).collect();
        data.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
        let got = naive_scan(&data, RangeQuery::new(100, 199).unwrap());
        assert_eq!(got.len(), 100);
        assert_eq!(sorted_multiset(&got), (100..200).collect::<Vec<_>>());
    }

    #[test]
    fn inverted_query_is_rejected() {
        assert_eq!(
            RangeQuery::new(4, 3),
            Err(LaiError::InvalidQuery { low: 4, high: 3 })
        );
    }

    #[test]
    fn case_names_round_trip() {
        for c in CaseKind::ALL {
            assert_eq!(c.as_str().parse::<CaseKind>().unwrap(), c);
        }
    }
}

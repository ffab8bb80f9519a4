//! The partition table: an ordered registry of sorted partitions.
//!
//! Each entry records the key interval of one sorted region of the column,
//! where it sits, and the learned model built over it. Entries are kept in a
//! contiguous vector sorted by key; because every partition was carved out by
//! cracking, key order and position order agree, so a single binary search
//! answers both "which partition holds key k" and "which unsorted gap must
//! hold it".

use std::fmt::{self, Write as _};
use std::ops::Range;
use std::sync::Arc;

use crate::error::{LaiError, Result};
use crate::model::PositionModel;
use crate::types::{Key, Position};

/// One sorted partition: `column[lo_pos..=hi_pos]` is sorted, starts with
/// `lo_key` and ends with `hi_key`.
#[derive(Clone)]
pub struct PartitionEntry {
    pub lo_key: Key,
    pub hi_key: Key,
    pub lo_pos: Position,
    pub hi_pos: Position,
    pub model: Arc<dyn PositionModel>,
    /// Assigned by [`PartitionTable::insert`].
    pub model_id: u64,
}

impl PartitionEntry {
    pub fn new(
        lo_key: Key,
        hi_key: Key,
        lo_pos: Position,
        hi_pos: Position,
        model: Arc<dyn PositionModel>,
    ) -> Self {
        PartitionEntry {
            lo_key,
            hi_key,
            lo_pos,
            hi_pos,
            model,
            model_id: 0,
        }
    }

    #[inline]
    pub fn positions(&self) -> Range<Position> {
        self.lo_pos..self.hi_pos + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.hi_pos + 1 - self.lo_pos
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn contains_key(&self, key: Key) -> bool {
        self.lo_key <= key && key <= self.hi_key
    }
}

impl fmt::Debug for PartitionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},#{})",
            self.lo_key, self.hi_key, self.lo_pos, self.hi_pos, self.model_id
        )
    }
}

/// A maximal run of unsorted positions, `start..end`.
///
/// [`PartitionTable::search_gap`] may return an empty gap: the slot between
/// two adjacent partitions where a key that is absent from the column would
/// have to live. [`PartitionTable::get_all_gaps`] never does.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub start: Position,
    pub end: Position,
}

impl Gap {
    pub fn new(start: Position, end: Position) -> Self {
        debug_assert!(start <= end);
        Gap { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn range(&self) -> Range<Position> {
        self.start..self.end
    }

    /// Inclusive `(lo_pos, hi_pos)`, or `None` for an empty gap.
    pub fn bounds(&self) -> Option<(Position, Position)> {
        (!self.is_empty()).then(|| (self.start, self.end - 1))
    }
}

#[derive(Debug, Clone)]
pub struct PartitionTable {
    entries: Vec<PartitionEntry>,
    column_len: usize,
    covered: usize,
    next_model_id: u64,
}

impl PartitionTable {
    pub fn new(column_len: usize) -> Self {
        PartitionTable {
            entries: Vec::new(),
            column_len,
            covered: 0,
            next_model_id: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn column_len(&self) -> usize {
        self.column_len
    }

    pub fn entries(&self) -> &[PartitionEntry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> Result<&PartitionEntry> {
        self.entries.get(idx).ok_or_else(|| {
            LaiError::precondition(format!(
                "entry index {idx} out of range for a table of {} entries",
                self.entries.len()
            ))
        })
    }

    /// Number of positions covered by sorted partitions.
    pub fn covered_positions(&self) -> usize {
        self.covered
    }

    /// Index of the first entry whose `hi_key >= key`.
    #[inline]
    fn slot(&self, key: Key) -> usize {
        self.entries.partition_point(|e| e.hi_key < key)
    }

    /// The entry whose key interval contains `key`.
    pub fn locate(&self, key: Key) -> Option<usize> {
        let idx = self.slot(key);
        (idx < self.entries.len() && self.entries[idx].lo_key <= key).then_some(idx)
    }

    /// Entry indexes holding `low` and `high`, each independently.
    pub fn search_sorted_partitions(&self, low: Key, high: Key) -> (Option<usize>, Option<usize>) {
        (self.locate(low), self.locate(high))
    }

    /// True iff some entry's key interval intersects the open interval
    /// `(low, high)`.
    pub fn is_overlap_query(&self, low: Key, high: Key) -> bool {
        let idx = self.entries.partition_point(|e| e.hi_key <= low);
        idx < self.entries.len() && self.entries[idx].lo_key < high
    }

    /// The unsorted position range where `key` must reside. Fails if `key`
    /// falls inside a sorted partition.
    pub fn search_gap(&self, key: Key) -> Result<Gap> {
        let idx = self.slot(key);
        if idx < self.entries.len() && self.entries[idx].lo_key <= key {
            let e = &self.entries[idx];
            return Err(LaiError::precondition(format!(
                "key {key} lies inside sorted partition [{}, {}]",
                e.lo_key, e.hi_key
            )));
        }
        let start = if idx == 0 {
            0
        } else {
            self.entries[idx - 1].hi_pos + 1
        };
        let end = self.entries.get(idx).map_or(self.column_len, |e| e.lo_pos);
        Ok(Gap::new(start, end))
    }

    /// All non-empty unsorted runs inside `range`, ascending.
    pub fn get_all_gaps(&self, range: Range<Position>) -> Vec<Gap> {
        let mut gaps = Vec::new();
        if range.start >= range.end {
            return gaps;
        }
        let first = self.entries.partition_point(|e| e.hi_pos < range.start);
        let mut cursor = range.start;
        for e in &self.entries[first..] {
            if e.lo_pos >= range.end {
                break;
            }
            if e.lo_pos > cursor {
                gaps.push(Gap::new(cursor, e.lo_pos));
            }
            cursor = cursor.max(e.hi_pos + 1);
        }
        if cursor < range.end {
            gaps.push(Gap::new(cursor, range.end));
        }
        gaps
    }

    /// Inserts `entry`, keeping key order. Returns the assigned model id.
    ///
    /// Overlap with an existing entry, in keys or positions, is an invariant
    /// violation and leaves the table unchanged.
    pub fn insert(&mut self, mut entry: PartitionEntry) -> Result<u64> {
        if entry.lo_key > entry.hi_key
            || entry.lo_pos > entry.hi_pos
            || entry.hi_pos >= self.column_len
        {
            return Err(LaiError::invariant(format!(
                "malformed partition entry {entry:?}"
            )));
        }
        let idx = self.slot(entry.lo_key);
        let left_ok = idx == 0 || {
            let prev = &self.entries[idx - 1];
            prev.hi_key < entry.lo_key && prev.hi_pos < entry.lo_pos
        };
        let right_ok = idx == self.entries.len() || {
            let next = &self.entries[idx];
            entry.hi_key < next.lo_key && entry.hi_pos < next.lo_pos
        };
        if !(left_ok && right_ok) {
            return Err(LaiError::invariant(format!(
                "partition entry {entry:?} overlaps an existing entry"
            )));
        }
        entry.model_id = self.next_model_id;
        self.next_model_id += 1;
        self.covered += entry.len();
        let id = entry.model_id;
        self.entries.insert(idx, entry);
        Ok(id)
    }

    pub fn get_learned_index(&self, idx: usize) -> Result<&Arc<dyn PositionModel>> {
        Ok(&self.entry(idx)?.model)
    }

    /// Inclusive `(lo_pos, hi_pos)` of entry `idx`.
    pub fn get_boundaries(&self, idx: usize) -> Result<(Position, Position)> {
        let e = self.entry(idx)?;
        Ok((e.lo_pos, e.hi_pos))
    }

    /// True iff sorted partitions cover every position of a non-empty column.
    pub fn is_fully_indexed(&self) -> bool {
        self.column_len > 0 && self.covered == self.column_len
    }

    /// One `lo_key,hi_key,lo_pos,hi_pos,model_id` line per entry.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.lo_key, e.hi_key, e.lo_pos, e.hi_pos, e.model_id
            );
        }
        out
    }

    /// Checks every structural invariant against the column contents.
    pub fn check_invariants(&self, data: &[Key]) -> Result<()> {
        if data.len() != self.column_len {
            return Err(LaiError::invariant("column length changed"));
        }
        let mut covered = 0;
        for (i, e) in self.entries.iter().enumerate() {
            if e.hi_pos >= data.len() || e.lo_pos > e.hi_pos || e.lo_key > e.hi_key {
                return Err(LaiError::invariant(format!("malformed entry {i}: {e:?}")));
            }
            let part = &data[e.positions()];
            if part[0] != e.lo_key || part[part.len() - 1] != e.hi_key {
                return Err(LaiError::invariant(format!(
                    "entry {i} {e:?} key bounds do not match column"
                )));
            }
            if part.windows(2).any(|w| w[0] > w[1]) {
                return Err(LaiError::invariant(format!(
                    "entry {i} {e:?} is not sorted"
                )));
            }
            if e.model.base_pos() != e.lo_pos || e.model.len() != e.len() {
                return Err(LaiError::invariant(format!(
                    "entry {i} model covers the wrong region"
                )));
            }
            if let Some(next) = self.entries.get(i + 1) {
                if !(e.hi_key < next.lo_key && e.hi_pos < next.lo_pos) {
                    return Err(LaiError::invariant(format!(
                        "entries {i} and {} are out of order",
                        i + 1
                    )));
                }
            }
            covered += e.len();
        }
        if covered != self.covered {
            return Err(LaiError::invariant("coverage counter out of sync"));
        }
        // Every gap key lies strictly between its neighbouring partitions.
        for gap in self.get_all_gaps(0..self.column_len) {
            let below = self.entries.partition_point(|e| e.hi_pos < gap.start);
            let lower_bound = below.checked_sub(1).map(|i| self.entries[i].hi_key);
            let upper_bound = self.entries.get(below).map(|e| e.lo_key);
            for &x in &data[gap.range()] {
                if lower_bound.is_some_and(|b| x <= b) || upper_bound.is_some_and(|b| x >= b) {
                    return Err(LaiError::invariant(format!(
                        "key {x} in gap {gap:?} is not between its neighbouring partitions"
                    )));
                }
            }
        }
        Ok(())
    }
}

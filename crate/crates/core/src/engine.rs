//! The learned adaptive index.
//!
//! Each query is classified by where its endpoints fall relative to the
//! sorted partitions recorded in the [`PartitionTable`]:
//!
//! | case | low endpoint | high endpoint | work |
//! |------|--------------|---------------|------|
//! | 1(i) | gap | another gap, partitions between | crack both gaps, index everything between |
//! | 1(ii)| gap | same gap | crack three ways, sort the middle |
//! | 2 | partition | same partition | two model lookups |
//! | 3 | partition | another partition | two lookups, index the gaps between |
//! | 4 | partition | gap | lookup, index gaps, crack the high gap |
//! | 5 | gap | partition | crack the low gap, index gaps, lookup |
//!
//! Every region that a query isolates is sorted and receives its own learned
//! model, so the column converges to a fully sorted ensemble of partitions.

use std::ops::Range;
use std::sync::Arc;

use crate::baselines::RangeEngine;
use crate::crack::{crack, crack_three};
use crate::error::{LaiError, Result};
use crate::learned_sort::{adaptive_sort, SortStats, DEFAULT_TAU};
use crate::model::{find, ModelBuilder, SplineBuilder, DEFAULT_EPSILON};
use crate::table::{Gap, PartitionEntry, PartitionTable};
use crate::types::{CaseKind, Column, Key, Position, QueryStats, RangeQuery};

#[derive(Debug, Clone)]
pub struct LaiConfig {
    /// Error bound handed to the model builder.
    pub epsilon: usize,
    /// Regions longer than this are sorted with the learned sort.
    pub tau: usize,
    pub model_builder: Arc<dyn ModelBuilder>,
}

impl Default for LaiConfig {
    fn default() -> Self {
        LaiConfig {
            epsilon: DEFAULT_EPSILON,
            tau: DEFAULT_TAU,
            model_builder: Arc::new(SplineBuilder),
        }
    }
}

impl LaiConfig {
    pub fn with_epsilon(mut self, epsilon: usize) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_tau(mut self, tau: usize) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_model_builder(mut self, builder: Arc<dyn ModelBuilder>) -> Self {
        self.model_builder = builder;
        self
    }
}

#[derive(Debug)]
pub struct LaiEngine {
    column: Column,
    table: PartitionTable,
    config: LaiConfig,
    sort_stats: SortStats,
    stats_log: Vec<QueryStats>,
}

impl LaiEngine {
    pub fn new(data: Vec<Key>, config: LaiConfig) -> Result<Self> {
        if config.epsilon == 0 {
            return Err(LaiError::Config("epsilon must be at least 1".into()));
        }
        let table = PartitionTable::new(data.len());
        Ok(LaiEngine {
            column: Column::new(data),
            table,
            config,
            sort_stats: SortStats::default(),
            stats_log: Vec::new(),
        })
    }

    pub fn column(&self) -> &[Key] {
        self.column.as_slice()
    }

    pub fn table(&self) -> &PartitionTable {
        &self.table
    }

    pub fn config(&self) -> &LaiConfig {
        &self.config
    }

    pub fn stats(&self) -> &[QueryStats] {
        &self.stats_log
    }

    pub fn sort_stats(&self) -> SortStats {
        self.sort_stats
    }

    /// Element writes performed on the column so far.
    pub fn writes(&self) -> u64 {
        self.column.writes()
    }

    pub fn is_fully_indexed(&self) -> bool {
        self.table.is_fully_indexed()
    }

    /// Answers `low <= x <= high`, returning the half-open position range of
    /// the matching keys, and appends a [`QueryStats`] record.
    pub fn query(&mut self, low: Key, high: Key) -> Result<Range<Position>> {
        self.run(RangeQuery::new(low, high)?)
    }

    /// Runs a query through the case dispatch without recording stats.
    pub fn execute(&mut self, low: Key, high: Key) -> Result<(CaseKind, Range<Position>)> {
        let case = self.classify(low, high)?;
        let (tl, th) = self.table.search_sorted_partitions(low, high);
        let range = match case {
            CaseKind::Case1i => self.overlap_unchecked(low, high)?,
            CaseKind::Case1ii => self.build_index_unchecked(low, high)?,
            CaseKind::Case2 => self.same_bound_unchecked(low, high, tl.unwrap())?,
            CaseKind::Case3 => {
                self.different_bound_unchecked(low, high, tl.unwrap(), th.unwrap())?
            }
            CaseKind::Case4 => self.crack_high_unchecked(low, high, tl.unwrap())?,
            CaseKind::Case5 => self.crack_low_unchecked(low, high, th.unwrap())?,
        };
        debug_assert!(range.start <= range.end);
        Ok((case, range))
    }

    /// The case `query(low, high)` would dispatch to. Does not mutate.
    pub fn classify(&self, low: Key, high: Key) -> Result<CaseKind> {
        RangeQuery::new(low, high)?;
        Ok(match self.table.search_sorted_partitions(low, high) {
            (None, None) if self.table.is_overlap_query(low, high) => CaseKind::Case1i,
            (None, None) => CaseKind::Case1ii,
            (Some(a), Some(b)) if a == b => CaseKind::Case2,
            (Some(_), Some(_)) => CaseKind::Case3,
            (Some(_), None) => CaseKind::Case4,
            (None, Some(_)) => CaseKind::Case5,
        })
    }

    fn expect_case(&self, low: Key, high: Key, expected: CaseKind) -> Result<()> {
        let actual = self.classify(low, high)?;
        if actual != expected {
            return Err(LaiError::precondition(format!(
                "query [{low}, {high}] is {actual}, not {expected}"
            )));
        }
        Ok(())
    }

    fn expect_entry(&self, idx: usize, key: Key) -> Result<()> {
        if self.table.locate(key) != Some(idx) {
            return Err(LaiError::precondition(format!(
                "key {key} is not inside entry {idx}"
            )));
        }
        Ok(())
    }

    /// Case 1(ii): both endpoints in one gap.
    pub fn build_index(&mut self, low: Key, high: Key) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case1ii)?;
        self.build_index_unchecked(low, high)
    }

    fn build_index_unchecked(&mut self, low: Key, high: Key) -> Result<Range<Position>> {
        let gap = self.table.search_gap(low)?;
        let mid = crack_three(&mut self.column, gap.range(), low, high)?;
        if !mid.is_empty() {
            self.index_region(mid.clone())?;
        }
        Ok(mid)
    }

    /// Case 1(i): endpoints in two different gaps with partitions between.
    pub fn execute_overlap_query(&mut self, low: Key, high: Key) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case1i)?;
        self.overlap_unchecked(low, high)
    }

    fn overlap_unchecked(&mut self, low: Key, high: Key) -> Result<Range<Position>> {
        let gap_low = self.table.search_gap(low)?;
        let gap_high = self.table.search_gap(high)?;
        let start = self.index_upper_part(gap_low, low)?;
        let end = self.index_lower_part(gap_high, high)?;
        self.build_index_for_all_gaps(gap_low.end..gap_high.start)?;
        Ok(start..end)
    }

    /// Sorts and indexes every gap inside `range`.
    pub fn build_index_for_all_gaps(&mut self, range: Range<Position>) -> Result<()> {
        self.column.check_range(&range)?;
        for gap in self.table.get_all_gaps(range) {
            // Cracking a gap on its own minimum and maximum moves nothing, so
            // indexing the whole gap directly is equivalent.
            self.index_region(gap.range())?;
        }
        Ok(())
    }

    /// Case 2: both endpoints in entry `idx`.
    pub fn get_results_from_same_bound(
        &mut self,
        low: Key,
        high: Key,
        idx: usize,
    ) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case2)?;
        self.expect_entry(idx, low)?;
        self.same_bound_unchecked(low, high, idx)
    }

    fn same_bound_unchecked(&self, low: Key, high: Key, idx: usize) -> Result<Range<Position>> {
        Ok(self.first_at_least(idx, low)?..self.end_at_most(idx, high)?)
    }

    /// Case 3: endpoints in entries `idx_low < idx_high`.
    pub fn get_results_from_different_bound(
        &mut self,
        low: Key,
        high: Key,
        idx_low: usize,
        idx_high: usize,
    ) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case3)?;
        self.expect_entry(idx_low, low)?;
        self.expect_entry(idx_high, high)?;
        self.different_bound_unchecked(low, high, idx_low, idx_high)
    }

    fn different_bound_unchecked(
        &mut self,
        low: Key,
        high: Key,
        idx_low: usize,
        idx_high: usize,
    ) -> Result<Range<Position>> {
        let start = self.first_at_least(idx_low, low)?;
        let end = self.end_at_most(idx_high, high)?;
        let (_, low_hi_pos) = self.table.get_boundaries(idx_low)?;
        let (high_lo_pos, _) = self.table.get_boundaries(idx_high)?;
        self.build_index_for_all_gaps(low_hi_pos + 1..high_lo_pos)?;
        Ok(start..end)
    }

    /// Case 4: `low` in entry `idx_low`, `high` in a gap.
    pub fn crack_for_high_value(
        &mut self,
        low: Key,
        high: Key,
        idx_low: usize,
    ) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case4)?;
        self.expect_entry(idx_low, low)?;
        self.crack_high_unchecked(low, high, idx_low)
    }

    fn crack_high_unchecked(
        &mut self,
        low: Key,
        high: Key,
        idx_low: usize,
    ) -> Result<Range<Position>> {
        let start = self.first_at_least(idx_low, low)?;
        let (_, low_hi_pos) = self.table.get_boundaries(idx_low)?;
        let gap_high = self.table.search_gap(high)?;
        self.build_index_for_all_gaps(low_hi_pos + 1..gap_high.start)?;
        let end = self.index_lower_part(gap_high, high)?;
        Ok(start..end)
    }

    /// Case 5: `low` in a gap, `high` in entry `idx_high`.
    pub fn crack_for_low_value(
        &mut self,
        low: Key,
        high: Key,
        idx_high: usize,
    ) -> Result<Range<Position>> {
        self.expect_case(low, high, CaseKind::Case5)?;
        self.expect_entry(idx_high, high)?;
        self.crack_low_unchecked(low, high, idx_high)
    }

    fn crack_low_unchecked(
        &mut self,
        low: Key,
        high: Key,
        idx_high: usize,
    ) -> Result<Range<Position>> {
        let end = self.end_at_most(idx_high, high)?;
        let (high_lo_pos, _) = self.table.get_boundaries(idx_high)?;
        let gap_low = self.table.search_gap(low)?;
        self.build_index_for_all_gaps(gap_low.end..high_lo_pos)?;
        let start = self.index_upper_part(gap_low, low)?;
        Ok(start..end)
    }

    /// First position in entry `idx` holding a key `>= key`.
    fn first_at_least(&self, idx: usize, key: Key) -> Result<Position> {
        let model = self.table.get_learned_index(idx)?;
        find(model.as_ref(), self.column.as_slice(), key)
    }

    /// One past the last position in entry `idx` holding a key `<= key`.
    fn end_at_most(&self, idx: usize, key: Key) -> Result<Position> {
        let entry = self.table.entry(idx)?;
        if key >= entry.hi_key {
            return Ok(entry.hi_pos + 1);
        }
        find(entry.model.as_ref(), self.column.as_slice(), key + 1)
    }

    /// Cracks `gap` on `low` and indexes the part `>= low`. Every key in the
    /// gap must be below the query's high bound. Returns the split position.
    fn index_upper_part(&mut self, gap: Gap, low: Key) -> Result<Position> {
        let split = crack(&mut self.column, gap.range(), low)?;
        if split < gap.end {
            self.index_region(split..gap.end)?;
        }
        Ok(split)
    }

    /// Cracks `gap` on `high + 1` and indexes the part `<= high`. Every key
    /// in the gap must be above the query's low bound. Returns the split.
    fn index_lower_part(&mut self, gap: Gap, high: Key) -> Result<Position> {
        let split = match high.checked_add(1) {
            Some(pivot) => crack(&mut self.column, gap.range(), pivot)?,
            None => gap.end,
        };
        if split > gap.start {
            self.index_region(gap.start..split)?;
        }
        Ok(split)
    }

    /// Sorts a non-empty cracked region, builds its model and records it.
    fn index_region(&mut self, range: Range<Position>) -> Result<()> {
        adaptive_sort(
            &mut self.column,
            range.clone(),
            self.config.tau,
            &mut self.sort_stats,
        )?;
        let keys = &self.column.as_slice()[range.clone()];
        let model = self
            .config
            .model_builder
            .build(keys, range.start, self.config.epsilon)?;
        let entry = PartitionEntry::new(
            keys[0],
            keys[keys.len() - 1],
            range.start,
            range.end - 1,
            model,
        );
        self.table.insert(entry)?;
        Ok(())
    }

    /// Validates every table invariant against the current column.
    pub fn check_invariants(&self) -> Result<()> {
        self.table.check_invariants(self.column.as_slice())
    }
}

impl RangeEngine for LaiEngine {
    fn name(&self) -> &'static str {
        "lai"
    }

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)> {
        let (case, range) = self.execute(q.low, q.high)?;
        Ok((Some(case), range))
    }

    fn view(&self, range: Range<Position>) -> &[Key] {
        &self.column.as_slice()[range]
    }

    fn stats_log(&self) -> &[QueryStats] {
        &self.stats_log
    }

    fn stats_log_mut(&mut self) -> &mut Vec<QueryStats> {
        &mut self.stats_log
    }

    fn writes(&self) -> u64 {
        self.column.writes()
    }
}

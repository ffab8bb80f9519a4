//! Comparison engines behind one query interface: classic cracking, the
//! DD1R stochastic variant, a presorted column with binary search, and a
//! plain scan.

use std::collections::{BTreeMap, HashSet};
use std::ops::Range;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crack::crack;
use crate::error::Result;
use crate::types::{CaseKind, Column, Key, Position, QueryStats, RangeQuery};

/// Anything that answers inclusive range queries.
///
/// `execute_query` does the work; `run` wraps it with a monotonic timer and
/// appends a [`QueryStats`] record. Results are position ranges into
/// whatever backing store `view` exposes.
pub trait RangeEngine {
    fn name(&self) -> &'static str;

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)>;

    fn view(&self, range: Range<Position>) -> &[Key];

    fn stats_log(&self) -> &[QueryStats];

    fn stats_log_mut(&mut self) -> &mut Vec<QueryStats>;

    /// Element writes made to the engine's column; zero for read-only engines.
    fn writes(&self) -> u64 {
        0
    }

    fn run(&mut self, q: RangeQuery) -> Result<Range<Position>> {
        let start = Instant::now();
        let (case, result) = self.execute_query(q)?;
        let latency_ns = start.elapsed().as_nanos() as u64;
        let log = self.stats_log_mut();
        log.push(QueryStats {
            query_index: log.len(),
            case,
            latency_ns,
            result: result.clone(),
        });
        Ok(result)
    }
}

/// Cracker index: pivot -> first position holding a key `>= pivot`.
#[derive(Debug, Default, Clone)]
struct CrackerIndex {
    pivots: BTreeMap<Key, Position>,
}

impl CrackerIndex {
    /// The piece that must contain `pivot`, as a position range.
    fn piece(&self, pivot: Key, len: usize) -> Range<Position> {
        let start = self
            .pivots
            .range(..pivot)
            .next_back()
            .map_or(0, |(_, &p)| p);
        let end = self.pivots.range(pivot..).next().map_or(len, |(_, &p)| p);
        start..end
    }
}

/// Standard database cracking: each query cracks the pieces holding its
/// bounds on `low` and `high + 1`. Nothing is sorted.
#[derive(Debug)]
pub struct CrackEngine {
    column: Column,
    index: CrackerIndex,
    touched: u64,
    stats_log: Vec<QueryStats>,
}

impl CrackEngine {
    pub fn new(data: Vec<Key>) -> Self {
        CrackEngine {
            column: Column::new(data),
            index: CrackerIndex::default(),
            touched: 0,
            stats_log: Vec::new(),
        }
    }

    pub fn column(&self) -> &[Key] {
        self.column.as_slice()
    }

    /// Elements scanned by cracking so far.
    pub fn touched(&self) -> u64 {
        self.touched
    }

    pub fn pivot_count(&self) -> usize {
        self.index.pivots.len()
    }

    fn bound_position(&mut self, pivot: Key) -> Result<Position> {
        if let Some(&p) = self.index.pivots.get(&pivot) {
            return Ok(p);
        }
        let piece = self.index.piece(pivot, self.column.len());
        self.touched += piece.len() as u64;
        let split = crack(&mut self.column, piece, pivot)?;
        self.index.pivots.insert(pivot, split);
        Ok(split)
    }

    /// True iff every pivot splits the column consistently.
    pub fn pivots_consistent(&self) -> bool {
        pivots_consistent(&self.index, self.column.as_slice())
    }
}

fn pivots_consistent(index: &CrackerIndex, data: &[Key]) -> bool {
    index
        .pivots
        .iter()
        .all(|(&k, &p)| data[..p].iter().all(|&x| x < k) && data[p..].iter().all(|&x| x >= k))
}

fn crack_query(
    q: RangeQuery,
    len: usize,
    mut bound: impl FnMut(Key) -> Result<Position>,
) -> Result<Range<Position>> {
    let start = bound(q.low)?;
    let end = match q.high.checked_add(1) {
        Some(p) => bound(p)?,
        None => len,
    };
    Ok(start..end)
}

impl RangeEngine for CrackEngine {
    fn name(&self) -> &'static str {
        "crack"
    }

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)> {
        let len = self.column.len();
        Ok((None, crack_query(q, len, |k| self.bound_position(k))?))
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

/// Stochastic cracking, DD1R flavour: before cracking a piece larger than
/// `len / 64` on a query bound, crack it once on a randomly chosen key from
/// the piece.
#[derive(Debug)]
pub struct Dd1rEngine {
    column: Column,
    index: CrackerIndex,
    rng: ChaCha8Rng,
    threshold: usize,
    randomized: HashSet<(Position, Position)>,
    touched: u64,
    stats_log: Vec<QueryStats>,
}

impl Dd1rEngine {
    pub fn new(data: Vec<Key>, seed: u64) -> Self {
        let threshold = data.len() / 64;
        Dd1rEngine {
            column: Column::new(data),
            index: CrackerIndex::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            threshold,
            randomized: HashSet::new(),
            touched: 0,
            stats_log: Vec::new(),
        }
    }

    pub fn column(&self) -> &[Key] {
        self.column.as_slice()
    }

    pub fn touched(&self) -> u64 {
        self.touched
    }

    pub fn pivots_consistent(&self) -> bool {
        pivots_consistent(&self.index, self.column.as_slice())
    }

    fn bound_position(&mut self, pivot: Key) -> Result<Position> {
        if let Some(&p) = self.index.pivots.get(&pivot) {
            return Ok(p);
        }
        let len = self.column.len();
        let piece = self.index.piece(pivot, len);
        if piece.len() > self.threshold && self.randomized.insert((piece.start, piece.end)) {
            let random_key = self.column.as_slice()[self.rng.random_range(piece.clone())];
            self.touched += piece.len() as u64;
            let split = crack(&mut self.column, piece, random_key)?;
            self.index.pivots.insert(random_key, split);
            if random_key == pivot {
                return Ok(split);
            }
        }
        let piece = self.index.piece(pivot, len);
        self.touched += piece.len() as u64;
        let split = crack(&mut self.column, piece, pivot)?;
        self.index.pivots.insert(pivot, split);
        Ok(split)
    }
}

impl RangeEngine for Dd1rEngine {
    fn name(&self) -> &'static str {
        "dd1r"
    }

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)> {
        let len = self.column.len();
        Ok((None, crack_query(q, len, |k| self.bound_position(k))?))
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

/// Sorts the column on the first query, then binary-searches both bounds.
#[derive(Debug)]
pub struct SortedEngine {
    data: Vec<Key>,
    sorted: bool,
    stats_log: Vec<QueryStats>,
}

impl SortedEngine {
    pub fn new(data: Vec<Key>) -> Self {
        SortedEngine {
            data,
            sorted: false,
            stats_log: Vec::new(),
        }
    }
}

impl RangeEngine for SortedEngine {
    fn name(&self) -> &'static str {
        "sorted"
    }

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)> {
        if !self.sorted {
            self.data.sort_unstable();
            self.sorted = true;
        }
        let start = self.data.partition_point(|&x| x < q.low);
        let end = self.data.partition_point(|&x| x <= q.high);
        Ok((None, start..end))
    }

    fn view(&self, range: Range<Position>) -> &[Key] {
        &self.data[range]
    }

    fn stats_log(&self) -> &[QueryStats] {
        &self.stats_log
    }

    fn stats_log_mut(&mut self) -> &mut Vec<QueryStats> {
        &mut self.stats_log
    }
}

/// Full scan per query; matches are copied into a result buffer.
#[derive(Debug)]
pub struct ScanEngine {
    data: Vec<Key>,
    results: Vec<Key>,
    stats_log: Vec<QueryStats>,
}

impl ScanEngine {
    pub fn new(data: Vec<Key>) -> Self {
        ScanEngine {
            data,
            results: Vec::new(),
            stats_log: Vec::new(),
        }
    }
}

impl RangeEngine for ScanEngine {
    fn name(&self) -> &'static str {
        "scan"
    }

    fn execute_query(&mut self, q: RangeQuery) -> Result<(Option<CaseKind>, Range<Position>)> {
        self.results.clear();
        self.results
            .extend(self.data.iter().copied().filter(|&x| q.contains(x)));
        Ok((None, 0..self.results.len()))
    }

    fn view(&self, range: Range<Position>) -> &[Key] {
        &self.results[range]
    }

    fn stats_log(&self) -> &[QueryStats] {
        &self.stats_log
    }

    fn stats_log_mut(&mut self) -> &mut Vec<QueryStats> {
        &mut self.stats_log
    }
}

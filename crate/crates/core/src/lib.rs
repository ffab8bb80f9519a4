//! Learned adaptive indexing over a single numeric column.
//!
//! Range queries crack the column in place; every region a query isolates is
//! sorted (with a learned sort for large regions) and gets its own learned
//! position model. A partition table maps key intervals to those sorted
//! regions, so later queries that land inside them become model lookups.
//! A batch forecaster can pre-build regions for predicted future queries.
//!
//! ```
//! use lai::{LaiConfig, LaiEngine};
//!
//! let data: Vec<u64> = vec![13, 16, 4, 9, 2, 12, 7, 1, 19, 3, 14, 11, 8, 6];
//! let mut engine = LaiEngine::new(data, LaiConfig::default()).unwrap();
//! let range = engine.query(9, 13).unwrap();
//! let mut hits = engine.column()[range].to_vec();
//! hits.sort();
//! assert_eq!(hits, vec![9, 11, 12, 13]);
//! ```

pub mod baselines;
pub mod crack;
pub mod engine;
pub mod error;
pub mod forecast;
pub mod learned_sort;
pub mod model;
pub mod table;
pub mod types;
pub mod workloads;

#[cfg(doctest)]
mod book;

pub use baselines::{CrackEngine, Dd1rEngine, RangeEngine, ScanEngine, SortedEngine};
pub use engine::{LaiConfig, LaiEngine};
pub use error::{LaiError, Result};
pub use types::{naive_scan, CaseKind, Column, Key, Position, QueryStats, RangeQuery};

//! Compiles the guide's code snippets as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[doc = include_str!("../../../book/src/cracking.md")]
mod cracking {}

#[doc = include_str!("../../../book/src/partition_table.md")]
mod partition_table {}

#[doc = include_str!("../../../book/src/models.md")]
mod models {}

#[doc = include_str!("../../../book/src/learned_sort.md")]
mod learned_sort {}

#[doc = include_str!("../../../book/src/query_cases.md")]
mod query_cases {}

#[doc = include_str!("../../../book/src/forecasting.md")]
mod forecasting {}

#[doc = include_str!("../../../book/src/benchmarking.md")]
mod benchmarking {}

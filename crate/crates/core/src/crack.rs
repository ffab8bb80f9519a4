//! In-place partitioning of a column region around a pivot key.
//!
//! Every reorganization step of the adaptive engines reduces to these two
//! primitives. Positions are half-open ranges throughout.

use std::ops::Range;

use crate::error::{LaiError, Result};
use crate::types::{Column, Key, Position};

/// Two-cursor partition of `data`: keys `< pivot` move to the front.
///
/// Returns the split offset and the number of swaps performed. Keys equal to
/// the pivot end up on the right. Not stable.
pub fn partition_in_place(data: &mut [Key], pivot: Key) -> (usize, u64) {
    let mut lo = 0;
    let mut hi = data.len();
    let mut swaps = 0;
    loop {
        while lo < hi && data[lo] < pivot {
            lo += 1;
        }
        while lo < hi && data[hi - 1] >= pivot {
            hi -= 1;
        }
        if lo >= hi {
            return (lo, swaps);
        }
        data.swap(lo, hi - 1);
        swaps += 1;
        lo += 1;
        hi -= 1;
    }
}

/// Cracks `column[range]` on `pivot` and returns the split position `s`:
/// positions `range.start..s` hold keys `< pivot`, `s..range.end` keys `>= pivot`.
pub fn crack(column: &mut Column, range: Range<Position>, pivot: Key) -> Result<Position> {
    column.check_range(&range)?;
    let start = range.start;
    let (split, swaps) = partition_in_place(column.region_mut(range), pivot);
    column.record_writes(2 * swaps);
    Ok(start + split)
}

/// Cracks `column[range]` on `low` and then on `high + 1`, so the returned
/// sub-range holds exactly the keys in `[low, high]`.
pub fn crack_three(
    column: &mut Column,
    range: Range<Position>,
    low: Key,
    high: Key,
) -> Result<Range<Position>> {
    if low > high {
        return Err(LaiError::InvalidQuery { low, high });
    }
    let end = range.end;
    let split_low = crack(column, range, low)?;
    let split_high = match high.checked_add(1) {
        Some(pivot) => crack(column, split_low..end, pivot)?,
        None => end,
    };
    Ok(split_low..split_high)
}

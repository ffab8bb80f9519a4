//! Learned position models over one sorted partition.
//!
//! A model maps a key to a predicted absolute position with a bounded error.
//! [`find`] turns any such model into an exact lower-bound lookup by
//! searching the error window around the prediction. The default family is
//! an error-bounded linear spline built greedily in a single pass.

use std::fmt;
use std::sync::Arc;

use crate::error::{LaiError, Result};
use crate::types::{Key, Position};

/// Default maximum prediction error, in positions.
pub const DEFAULT_EPSILON: usize = 32;

/// A trained key -> position model over one sorted partition.
pub trait PositionModel: Send + Sync + fmt::Debug {
    /// Predicted absolute position of the first key `>= key`. Only meaningful
    /// for keys inside the partition's key range.
    fn predict(&self, key: Key) -> Position;

    /// Upper bound on `|predict(k) - true position|` over trained keys.
    fn max_error(&self) -> usize;

    /// First position covered by the model.
    fn base_pos(&self) -> Position;

    /// Number of positions covered.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn family(&self) -> &'static str;
}

/// Builds a model over `keys`, which sit at positions `base_pos..` and are
/// sorted ascending.
pub trait ModelBuilder: Send + Sync + fmt::Debug {
    fn build(
        &self,
        keys: &[Key],
        base_pos: Position,
        epsilon: usize,
    ) -> Result<Arc<dyn PositionModel>>;
}

/// A knot-to-knot linear piece of a spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start_key: Key,
    /// Positions per key unit.
    pub slope: f64,
    /// Predicted absolute position at `start_key`.
    pub intercept: f64,
}

/// Monotone linear spline whose knots are training points; every trained key
/// is predicted within `epsilon` positions.
#[derive(Debug, Clone)]
pub struct SplineModel {
    /// `(key, offset from base_pos)`, keys strictly increasing.
    knots: Vec<(Key, usize)>,
    base_pos: Position,
    len: usize,
    epsilon: usize,
}

impl SplineModel {
    pub fn build(keys: &[Key], base_pos: Position, epsilon: usize) -> Result<Self> {
        if epsilon == 0 {
            return Err(LaiError::Config("model epsilon must be at least 1".into()));
        }
        let points = distinct_points(keys)?;
        let knots = greedy_spline(&points, epsilon);
        Ok(SplineModel {
            knots,
            base_pos,
            len: keys.len(),
            epsilon,
        })
    }

    pub fn knots(&self) -> &[(Key, usize)] {
        &self.knots
    }

    pub fn segments(&self) -> Vec<Segment> {
        if self.knots.len() == 1 {
            let (k, y) = self.knots[0];
            return vec![Segment {
                start_key: k,
                slope: 0.0,
                intercept: (self.base_pos + y) as f64,
            }];
        }
        self.knots
            .windows(2)
            .map(|w| {
                let ((x0, y0), (x1, y1)) = (w[0], w[1]);
                Segment {
                    start_key: x0,
                    slope: (y1 - y0) as f64 / (x1 - x0) as f64,
                    intercept: (self.base_pos + y0) as f64,
                }
            })
            .collect()
    }
}

impl PositionModel for SplineModel {
    fn predict(&self, key: Key) -> Position {
        let knots = &self.knots;
        let i = knots.partition_point(|&(k, _)| k <= key);
        let offset = if i == 0 {
            knots[0].1
        } else if i == knots.len() {
            knots[i - 1].1
        } else {
            let (x0, y0) = knots[i - 1];
            let (x1, y1) = knots[i];
            // Exact floor of the interpolated value; floor keeps the error
            // bound because knot positions are integers.
            let num = (key - x0) as u128 * (y1 - y0) as u128;
            y0 + (num / (x1 - x0) as u128) as usize
        };
        self.base_pos + offset
    }

    fn max_error(&self) -> usize {
        self.epsilon
    }

    fn base_pos(&self) -> Position {
        self.base_pos
    }

    fn len(&self) -> usize {
        self.len
    }

    fn family(&self) -> &'static str {
        "spline"
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SplineBuilder;

impl ModelBuilder for SplineBuilder {
    fn build(
        &self,
        keys: &[Key],
        base_pos: Position,
        epsilon: usize,
    ) -> Result<Arc<dyn PositionModel>> {
        Ok(Arc::new(SplineModel::build(keys, base_pos, epsilon)?))
    }
}

/// One line through the first and last keys; the error bound is whatever the
/// data needs. Cheap to build, useful for near-uniform partitions.
#[derive(Debug, Clone)]
pub struct LinearModel {
    first: (Key, usize),
    last: (Key, usize),
    base_pos: Position,
    len: usize,
    max_error: usize,
}

impl LinearModel {
    pub fn build(keys: &[Key], base_pos: Position) -> Result<Self> {
        let points = distinct_points(keys)?;
        let first = points[0];
        let last = *points.last().unwrap();
        let mut model = LinearModel {
            first,
            last,
            base_pos,
            len: keys.len(),
            max_error: 0,
        };
        model.max_error = points
            .iter()
            .map(|&(k, y)| (model.predict(k) - base_pos).abs_diff(y))
            .max()
            .unwrap_or(0);
        Ok(model)
    }
}

impl PositionModel for LinearModel {
    fn predict(&self, key: Key) -> Position {
        let ((x0, y0), (x1, y1)) = (self.first, self.last);
        let offset = if key <= x0 || x1 == x0 {
            y0
        } else if key >= x1 {
            y1
        } else {
            y0 + ((key - x0) as u128 * (y1 - y0) as u128 / (x1 - x0) as u128) as usize
        };
        self.base_pos + offset
    }

    fn max_error(&self) -> usize {
        self.max_error
    }

    fn base_pos(&self) -> Position {
        self.base_pos
    }

    fn len(&self) -> usize {
        self.len
    }

    fn family(&self) -> &'static str {
        "linear"
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct LinearBuilder;

impl ModelBuilder for LinearBuilder {
    fn build(
        &self,
        keys: &[Key],
        base_pos: Position,
        _epsilon: usize,
    ) -> Result<Arc<dyn PositionModel>> {
        Ok(Arc::new(LinearModel::build(keys, base_pos)?))
    }
}

/// `(key, first offset of key)` for each distinct key. Fails if `keys` is
/// empty or not sorted.
fn distinct_points(keys: &[Key]) -> Result<Vec<(Key, usize)>> {
    if keys.is_empty() {
        return Err(LaiError::precondition(
            "cannot build a model over an empty region",
        ));
    }
    let mut points = Vec::with_capacity(keys.len());
    points.push((keys[0], 0));
    for (i, w) in keys.windows(2).enumerate() {
        match w[0].cmp(&w[1]) {
            std::cmp::Ordering::Less => points.push((w[1], i + 1)),
            std::cmp::Ordering::Equal => {}
            std::cmp::Ordering::Greater => {
                return Err(LaiError::precondition(format!(
                    "model region is not sorted at offset {}",
                    i + 1
                )))
            }
        }
    }
    Ok(points)
}

/// `dy_a / dx_a < dy_b / dx_b` for positive `dx`.
#[inline]
fn slope_less(dx_a: i128, dy_a: i128, dx_b: i128, dy_b: i128) -> bool {
    dy_a * dx_b < dy_b * dx_a
}

/// Greedy spline corridor: keeps the range of slopes from the last knot that
/// stays within `epsilon` of every point seen, and emits a knot when a new
/// point falls outside it.
fn greedy_spline(points: &[(Key, usize)], epsilon: usize) -> Vec<(Key, usize)> {
    let mut knots = vec![points[0]];
    if points.len() == 1 {
        return knots;
    }
    let eps = epsilon as i128;
    let rel = |base: (Key, usize), p: (Key, usize)| -> (i128, i128) {
        ((p.0 - base.0) as i128, p.1 as i128 - base.1 as i128)
    };

    let mut base = points[0];
    let (dx, dy) = rel(base, points[1]);
    let mut upper = (dx, dy + eps);
    let mut lower = (dx, dy - eps);
    let mut prev = points[1];

    for &p in &points[2..] {
        let (dx, dy) = rel(base, p);
        let above = slope_less(upper.0, upper.1, dx, dy);
        let below = slope_less(dx, dy, lower.0, lower.1);
        if above || below {
            knots.push(prev);
            base = prev;
            let (dx, dy) = rel(base, p);
            upper = (dx, dy + eps);
            lower = (dx, dy - eps);
        } else {
            if slope_less(dx, dy + eps, upper.0, upper.1) {
                upper = (dx, dy + eps);
            }
            if slope_less(lower.0, lower.1, dx, dy - eps) {
                lower = (dx, dy - eps);
            }
        }
        prev = p;
    }
    knots.push(prev);
    knots
}

/// Exact position of the first key `>= key` inside the partition covered by
/// `model`, found by searching the model's error window in `data` (the whole
/// column).
///
/// `key` must lie within the partition's key range.
pub fn find(model: &dyn PositionModel, data: &[Key], key: Key) -> Result<Position> {
    let base = model.base_pos();
    let part = data
        .get(base..base + model.len())
        .filter(|p| !p.is_empty())
        .ok_or_else(|| LaiError::precondition("model does not cover a valid column region"))?;
    let (lo_key, hi_key) = (part[0], part[part.len() - 1]);
    if key < lo_key || key > hi_key {
        return Err(LaiError::precondition(format!(
            "key {key} outside partition key range [{lo_key}, {hi_key}]"
        )));
    }
    Ok(base
        + lower_bound_near(
            part,
            model.predict(key).saturating_sub(base),
            model.max_error(),
            key,
        ))
}

/// Lower bound of `key` in sorted `part`, searching `predicted +- (err + 1)`
/// first. Falls back to a binary search of the remaining side when the
/// window does not bracket the answer, which only happens for absent keys
/// next to long runs of duplicates or for models that break their bound.
pub(crate) fn lower_bound_near(part: &[Key], predicted: usize, err: usize, key: Key) -> usize {
    let n = part.len();
    let predicted = predicted.min(n - 1);
    let lo = predicted.saturating_sub(err + 1);
    let hi = (predicted + err + 2).min(n);
    let left_ok = lo == 0 || part[lo - 1] < key;
    let right_ok = hi == n || part[hi] >= key;
    if left_ok && right_ok {
        lo + part[lo..hi].partition_point(|&x| x < key)
    } else if !left_ok {
        part[..lo].partition_point(|&x| x < key)
    } else {
        hi + part[hi..].partition_point(|&x| x < key)
    }
}

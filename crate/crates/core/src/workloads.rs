//! Seeded generators for the ten synthetic range-query workloads.
//!
//! All generators work on the key domain `[0, domain)`. Parameters not fixed
//! by the workload shape (widths, steps, jump sizes) default to values that
//! make `n_queries` queries sweep the domain once.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LaiError, Result};
use crate::types::{Key, RangeQuery};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkloadKind {
    Random,
    SequentialRandom,
    SequentialAlternate,
    SequentialInverse,
    SequentialOverlap,
    ZoomIn,
    SequentialZoomIn,
    ZoomOut,
    SequentialZoomOut,
    Periodic,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 10] = [
        WorkloadKind::Random,
        WorkloadKind::SequentialRandom,
        WorkloadKind::SequentialAlternate,
        WorkloadKind::SequentialInverse,
        WorkloadKind::SequentialOverlap,
        WorkloadKind::ZoomIn,
        WorkloadKind::SequentialZoomIn,
        WorkloadKind::ZoomOut,
        WorkloadKind::SequentialZoomOut,
        WorkloadKind::Periodic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkloadKind::Random => "random",
            WorkloadKind::SequentialRandom => "seq_random",
            WorkloadKind::SequentialAlternate => "seq_alternate",
            WorkloadKind::SequentialInverse => "seq_inverse",
            WorkloadKind::SequentialOverlap => "seq_overlap",
            WorkloadKind::ZoomIn => "zoomin",
            WorkloadKind::SequentialZoomIn => "seq_zoomin",
            WorkloadKind::ZoomOut => "zoomout",
            WorkloadKind::SequentialZoomOut => "seq_zoomout",
            WorkloadKind::Periodic => "periodic",
        }
    }

    fn is_zoom(self) -> bool {
        matches!(
            self,
            WorkloadKind::ZoomIn
                | WorkloadKind::ZoomOut
                | WorkloadKind::SequentialZoomIn
                | WorkloadKind::SequentialZoomOut
        )
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WorkloadKind {
    type Err = LaiError;

    fn from_str(s: &str) -> Result<Self> {
        WorkloadKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| LaiError::Config(format!("unknown workload `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    /// Keys are drawn from `[0, domain)`.
    pub domain: u64,
    pub n_queries: usize,
    pub seed: u64,
    /// Maximum query width as a fraction of the domain.
    pub selectivity: f64,
    /// Per-query movement of the sequential endpoint(s); `None` derives it.
    pub step: Option<u64>,
    /// Queries per zoom group in the sequential zoom workloads.
    pub zoom_group: usize,
}

impl WorkloadSpec {
    pub const DEFAULT_SELECTIVITY: f64 = 0.001;
    pub const DEFAULT_ZOOM_GROUP: usize = 5;

    pub fn new(kind: WorkloadKind, domain: u64, n_queries: usize, seed: u64) -> Self {
        WorkloadSpec {
            kind,
            domain,
            n_queries,
            seed,
            selectivity: Self::DEFAULT_SELECTIVITY,
            step: None,
            zoom_group: Self::DEFAULT_ZOOM_GROUP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain == 0 {
            return Err(LaiError::Config("workload domain must be non-empty".into()));
        }
        if !(self.selectivity > 0.0 && self.selectivity <= 1.0) {
            return Err(LaiError::Config(format!(
                "selectivity {} not in (0, 1]",
                self.selectivity
            )));
        }
        if self.zoom_group == 0 {
            return Err(LaiError::Config(
                "zoom group must hold at least one query".into(),
            ));
        }
        Ok(())
    }

    /// Largest random width, at least 1 key.
    pub fn max_width(&self) -> u64 {
        ((self.domain as f64 * self.selectivity) as u64).clamp(1, self.domain)
    }

    /// The effective per-query step.
    pub fn effective_step(&self) -> u64 {
        if let Some(step) = self.step {
            return step.max(1);
        }
        let n = self.n_queries.max(1) as u64;
        match self.kind {
            WorkloadKind::ZoomIn | WorkloadKind::ZoomOut => (self.domain / (2 * n)).max(1),
            WorkloadKind::SequentialZoomIn | WorkloadKind::SequentialZoomOut => {
                (self.zoom_window() / (2 * self.zoom_group as u64)).max(1)
            }
            _ => (self.domain / n).max(1),
        }
    }

    fn zoom_groups(&self) -> u64 {
        self.n_queries.div_ceil(self.zoom_group).max(1) as u64
    }

    /// Distance between consecutive zoom windows.
    fn zoom_offset(&self) -> u64 {
        (self.domain / self.zoom_groups()).max(1)
    }

    /// Width of the widest query in a zoom window.
    fn zoom_window(&self) -> u64 {
        self.max_width().min(self.zoom_offset()).max(1)
    }

    /// Periodic: number of disjoint opening ranges.
    pub fn periodic_tiles(&self) -> u64 {
        ((self.n_queries / 20).max(1) as u64).min(self.domain)
    }

    /// Periodic: constant query width, at most half the tile spacing so the
    /// opening ranges leave unsorted gaps between them.
    pub fn periodic_width(&self) -> u64 {
        let spacing = self.domain / self.periodic_tiles();
        self.max_width().min(spacing / 2).max(1)
    }
}

/// Builds a query from possibly out-of-domain bounds by clamping into
/// `[0, domain)` and ordering them.
fn clamped(low: i128, high: i128, domain: u64) -> RangeQuery {
    let max = domain as i128 - 1;
    let (a, b) = (low.clamp(0, max) as Key, high.clamp(0, max) as Key);
    RangeQuery {
        low: a.min(b),
        high: a.max(b),
    }
}

pub fn generate(spec: &WorkloadSpec) -> Result<Vec<RangeQuery>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_queries;
    let domain = spec.domain;
    let w = spec.max_width();
    let step = spec.effective_step() as i128;
    let top = domain as i128 - 1;
    let width = |rng: &mut ChaCha8Rng| rng.random_range(0..w) as i128;
    // Sequential endpoints wrap around instead of leaving the domain.
    let wrap = |x: i128| x.rem_euclid(domain as i128);

    let mut out = Vec::with_capacity(n);
    match spec.kind {
        WorkloadKind::Random => {
            for _ in 0..n {
                let l = rng.random_range(0..domain) as i128;
                out.push(clamped(l, l + width(&mut rng), domain));
            }
        }
        WorkloadKind::SequentialRandom => {
            for i in 0..n as i128 {
                let l = if i % 2 == 0 {
                    rng.random_range(0..domain) as i128
                } else {
                    wrap((i / 2) * step)
                };
                out.push(clamped(l, l + width(&mut rng), domain));
            }
        }
        WorkloadKind::SequentialAlternate => {
            for i in 0..n as i128 {
                if i % 2 == 0 {
                    let h = top - wrap((i / 2) * step);
                    out.push(clamped(h - width(&mut rng), h, domain));
                } else {
                    let l = wrap((i / 2) * step);
                    out.push(clamped(l, l + width(&mut rng), domain));
                }
            }
        }
        WorkloadKind::SequentialInverse => {
            for i in 0..n as i128 {
                let h = top - wrap(i * step);
                out.push(clamped(h - width(&mut rng), h, domain));
            }
        }
        WorkloadKind::SequentialOverlap => {
            for i in 0..n as i128 {
                let l = wrap(i * step);
                out.push(clamped(l, l + width(&mut rng), domain));
            }
        }
        WorkloadKind::ZoomIn => {
            // Shrinking stops once the range would become empty.
            let last = top / (2 * step);
            for i in 0..n as i128 {
                let i = i.min(last);
                out.push(clamped(i * step, top - i * step, domain));
            }
        }
        WorkloadKind::ZoomOut => {
            let centre = top / 2;
            for i in 0..n as i128 {
                out.push(clamped(centre - i * step, centre + i * step, domain));
            }
        }
        WorkloadKind::SequentialZoomIn => {
            let offset = spec.zoom_offset() as i128;
            let window = spec.zoom_window() as i128;
            let last = (window - 1) / (2 * step);
            let zg = spec.zoom_group as i128;
            for i in 0..n as i128 {
                let base = (i / zg) * offset;
                let j = (i % zg).min(last);
                out.push(clamped(
                    base + j * step,
                    base + window - 1 - j * step,
                    domain,
                ));
            }
        }
        WorkloadKind::SequentialZoomOut => {
            let offset = spec.zoom_offset() as i128;
            let zg = spec.zoom_group as i128;
            for i in 0..n as i128 {
                let centre = (i / zg) * offset + offset / 2;
                let j = i % zg;
                out.push(clamped(centre - j * step, centre + j * step, domain));
            }
        }
        WorkloadKind::Periodic => {
            let tiles = spec.periodic_tiles() as i128;
            let spacing = domain as i128 / tiles;
            let width = spec.periodic_width() as i128;
            // Slide by less than the width so each low bound lands inside
            // the previous range.
            let shift = step.min((width - 1).max(1));
            let span = (domain as i128 - width + 1).max(1);
            for i in 0..n as i128 {
                let l = if i < tiles {
                    i * spacing
                } else {
                    ((i - tiles + 1) * shift) % span
                };
                out.push(clamped(l, l + width - 1, domain));
            }
        }
    }
    debug_assert!(!spec.kind.is_zoom() || out.iter().all(|q| q.low <= q.high));
    Ok(out)
}

/// The keys `0..n` in a seeded random order.
pub fn shuffled_keys(n: u64, seed: u64) -> Vec<Key> {
    use rand::seq::SliceRandom;
    let mut keys: Vec<Key> = (0..n).collect();
    keys.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    keys
}

/// `idx,l,h` CSV with a header row.
pub fn to_csv(queries: &[RangeQuery]) -> String {
    let mut out = String::from("idx,l,h\n");
    for (i, q) in queries.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", q.low, q.high));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: u64 = 1_000_000;

    fn gen(kind: WorkloadKind, n: usize) -> Vec<RangeQuery> {
        generate(&WorkloadSpec::new(kind, N, n, 7)).unwrap()
    }

    fn diffs(xs: &[i128]) -> Vec<i128> {
        xs.windows(2).map(|w| w[1] - w[0]).collect()
    }

    #[test]
    fn every_kind_stays_in_domain_and_is_deterministic() {
        for kind in WorkloadKind::ALL {
            let a = gen(kind, 2000);
            assert_eq!(a.len(), 2000);
            assert!(a.iter().all(|q| q.low <= q.high && q.high < N), "{kind}");
            assert_eq!(a, gen(kind, 2000), "{kind}");
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in WorkloadKind::ALL {
            assert_eq!(kind.as_str().parse::<WorkloadKind>().unwrap(), kind);
        }
        assert!("zoom".parse::<WorkloadKind>().is_err());
    }

    #[test]
    fn periodic_widths_are_constant() {
        let qs = gen(WorkloadKind::Periodic, 2000);
        let w = qs[0].high - qs[0].low;
        assert!(qs.iter().all(|q| q.high - q.low == w));
        let spec = WorkloadSpec::new(WorkloadKind::Periodic, N, 2000, 7);
        let tiles = spec.periodic_tiles() as usize;
        // opening ranges are pairwise disjoint
        assert!(qs[..tiles].windows(2).all(|p| p[0].high < p[1].low));
        // afterwards low lands in the previous range and high does not
        for p in qs[tiles..].windows(2) {
            if p[1].low > p[0].low {
                assert!(p[0].contains(p[1].low) && !p[0].contains(p[1].high));
            }
        }
    }

    #[test]
    fn zoom_in_unrolled() {
        let spec = WorkloadSpec::new(WorkloadKind::ZoomIn, N, 2000, 1);
        let s = spec.effective_step();
        assert_eq!(s, 250);
        for (i, q) in generate(&spec).unwrap().iter().enumerate() {
            let i = i as u64;
            assert_eq!((q.low, q.high), (i * s, N - 1 - i * s));
        }
    }

    #[test]
    fn zoom_in_stops_at_crossing() {
        let mut spec = WorkloadSpec::new(WorkloadKind::ZoomIn, 100, 80, 1);
        spec.step = Some(1);
        let qs = generate(&spec).unwrap();
        assert!(qs.iter().all(|q| q.low <= q.high));
        assert_eq!(qs[79], qs[60]);
    }

    #[test]
    fn zoom_out_grows_from_centre() {
        let qs = gen(WorkloadKind::ZoomOut, 2000);
        assert_eq!(qs[0].low, qs[0].high);
        assert!(qs
            .windows(2)
            .all(|p| p[1].low <= p[0].low && p[1].high >= p[0].high));
    }

    #[test]
    fn sequential_zoom_in_is_piecewise_linear() {
        let spec = WorkloadSpec::new(WorkloadKind::SequentialZoomIn, N, 2000, 3);
        let qs = generate(&spec).unwrap();
        let zg = spec.zoom_group;
        let lows: Vec<i128> = qs.iter().map(|q| q.low as i128).collect();
        let highs: Vec<i128> = qs.iter().map(|q| q.high as i128).collect();
        for series in [diffs(&lows), diffs(&highs)] {
            let within: Vec<i128> = series
                .iter()
                .enumerate()
                .filter(|(i, _)| (i + 1) % zg != 0)
                .map(|(_, d)| *d)
                .collect();
            let jumps: Vec<i128> = series
                .iter()
                .enumerate()
                .filter(|(i, _)| (i + 1) % zg == 0)
                .map(|(_, d)| *d)
                .collect();
            assert!(within.iter().all(|&d| d == within[0]));
            assert!(jumps.iter().all(|&d| d == jumps[0]));
            assert!(jumps[0].abs() > 5 * within[0].abs());
        }
        // each group zooms in
        assert!(qs.chunks(zg).all(|g| g
            .windows(2)
            .all(|p| p[1].low > p[0].low && p[1].high < p[0].high)));
    }

    #[test]
    fn sequential_zoom_out_groups() {
        let qs = gen(WorkloadKind::SequentialZoomOut, 2000);
        assert!(qs.chunks(5).all(|g| g[0].low == g[0].high
            && g.windows(2)
                .all(|p| p[1].low < p[0].low && p[1].high > p[0].high)));
        assert!(qs
            .chunks(5)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1][0].low > w[0][4].high));
    }

    #[test]
    fn sequential_shapes() {
        let inv = gen(WorkloadKind::SequentialInverse, 2000);
        assert!(inv.windows(2).all(|p| p[1].high < p[0].high));
        let over = gen(WorkloadKind::SequentialOverlap, 2000);
        assert!(over.windows(2).all(|p| p[1].low > p[0].low));
        let alt = gen(WorkloadKind::SequentialAlternate, 2000);
        let odd_highs: Vec<Key> = alt.iter().step_by(2).map(|q| q.high).collect();
        let even_lows: Vec<Key> = alt.iter().skip(1).step_by(2).map(|q| q.low).collect();
        assert!(odd_highs.windows(2).all(|p| p[1] < p[0]));
        assert!(even_lows.windows(2).all(|p| p[1] > p[0]));
        let sr = gen(WorkloadKind::SequentialRandom, 2000);
        let seq: Vec<Key> = sr.iter().skip(1).step_by(2).map(|q| q.low).collect();
        assert!(seq.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn random_widths_bounded() {
        let spec = WorkloadSpec::new(WorkloadKind::Random, N, 2000, 9);
        let w = spec.max_width();
        assert!(generate(&spec).unwrap().iter().all(|q| q.high - q.low < w));
    }

    #[test]
    fn oversized_step_is_clamped() {
        let mut spec = WorkloadSpec::new(WorkloadKind::ZoomOut, 1000, 50, 0);
        spec.step = Some(10_000);
        let qs = generate(&spec).unwrap();
        assert!(qs.iter().all(|q| q.high < 1000));
        assert_eq!((qs[1].low, qs[1].high), (0, 999));
    }

    #[test]
    fn invalid_specs() {
        let mut spec = WorkloadSpec::new(WorkloadKind::Random, 0, 10, 0);
        assert!(generate(&spec).is_err());
        spec.domain = 10;
        spec.selectivity = 0.0;
        assert!(generate(&spec).is_err());
    }

    #[test]
    fn shuffled_keys_is_a_permutation() {
        let mut k = shuffled_keys(1000, 5);
        assert_eq!(k, shuffled_keys(1000, 5));
        assert_ne!(k, shuffled_keys(1000, 6));
        k.sort_unstable();
        assert_eq!(k, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn csv_dump() {
        let qs = vec![
            RangeQuery::new(1, 2).unwrap(),
            RangeQuery::new(3, 9).unwrap(),
        ];
        assert_eq!(to_csv(&qs), "idx,l,h\n0,1,2\n1,3,9\n");
    }
}

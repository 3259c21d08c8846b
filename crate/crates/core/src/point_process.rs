//! Exceedance point processes on `(0, 1]`.
//!
//! From data: index `i` of a path of length `n` is placed at `i/n` and counted
//! for every level it strictly exceeds. In the limit: the process for the
//! lowest level is homogeneous Poisson with intensity `tau_s`, and each higher
//! level keeps a point of the level below it independently with probability
//! `tau_j / tau_{j+1}`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::LevelVector;

/// Finite union of disjoint half-open intervals `(a, b]` inside `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &intervals {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
                return Err(Error::invalid(format!(
                    "interval ({a}, {b}] must satisfy 0 <= a <= b <= 1"
                )));
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        if let Some(w) = intervals.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(Error::invalid(format!(
                "intervals ({}, {}] and ({}, {}] overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        Ok(IntervalSet { intervals })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![(a, b)])
    }

    /// `(0, 1]`.
    pub fn unit() -> Self {
        IntervalSet {
            intervals: vec![(0.0, 1.0)],
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < t && t <= b)
    }

    /// Half-open index ranges `lo..hi` (0-based) of the points `i/n`,
    /// `i = 1..=n`, that fall in the set.
    pub fn index_ranges(&self, n: usize) -> Vec<(usize, usize)> {
        self.intervals
            .iter()
            .map(|&(a, b)| (grid_points_at_or_below(a, n), grid_points_at_or_below(b, n)))
            .filter(|(lo, hi)| lo < hi)
            .collect()
    }
}

impl std::fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .intervals
            .iter()
            .map(|(a, b)| format!("({a},{b}]"))
            .collect();
        write!(f, "{}", parts.join("u"))
    }
}

impl std::str::FromStr for IntervalSet {
    type Err = Error;

    /// Parses `a:b` or a `+`-separated union such as `0:0.25+0.5:1`; the
    /// display form `(0,0.25]u(0.5,1]` is accepted too.
    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: String| Error::Parse {
            what: "interval",
            input: s.to_string(),
            reason,
        };
        let bracketed = s.trim_start().starts_with('(');
        let (sep, inner) = if bracketed { ('u', ',') } else { ('+', ':') };
        let mut out = Vec::new();
        for part in s.split(sep) {
            let mut part = part.trim();
            if bracketed {
                part = part
                    .strip_prefix('(')
                    .and_then(|p| p.strip_suffix(']'))
                    .ok_or_else(|| fail("expected (a,b]".into()))?;
            }
            let (a, b) = part
                .split_once(inner)
                .ok_or_else(|| fail(format!("expected a{inner}b")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| fail(e.to_string()));
            out.push((parse(a)?, parse(b)?));
        }
        IntervalSet::new(out)
    }
}

/// Number of `i` in `1..=n` with `i/n <= v`, consistent with evaluating
/// `i as f64 / n as f64 <= v` directly.
fn grid_points_at_or_below(v: f64, n: usize) -> usize {
    let nf = n as f64;
    let mut k = (v * nf).floor().clamp(0.0, nf) as usize;
    while k < n && (k + 1) as f64 / nf <= v {
        k += 1;
    }
    while k > 0 && k as f64 / nf > v {
        k -= 1;
    }
    k
}

/// Level-by-region count matrix, row-major by level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountMatrix {
    pub levels: usize,
    pub regions: usize,
    pub data: Vec<u32>,
}

impl CountMatrix {
    pub fn zeros(levels: usize, regions: usize) -> Self {
        CountMatrix {
            levels,
            regions,
            data: vec![0; levels * regions],
        }
    }

    pub fn get(&self, level: usize, region: usize) -> u32 {
        self.data[level * self.regions + region]
    }
}

/// Precomputed index ranges for a fixed path length.
#[derive(Debug, Clone)]
pub(crate) struct RegionIndex {
    ranges: Vec<Vec<(usize, usize)>>,
}

impl RegionIndex {
    pub fn new(regions: &[IntervalSet], n: usize) -> Self {
        RegionIndex {
            ranges: regions.iter().map(|r| r.index_ranges(n)).collect(),
        }
    }

    /// Adds the exceedances of `path` to `out` (which must be zeroed).
    /// `levels` must be nonincreasing.
    pub fn count_into(&self, path: &[f64], levels: &[f64], out: &mut [u32]) {
        for (i, &x) in path.iter().enumerate() {
            self.record(i, x, levels, out);
        }
    }

    /// Adds observation `x` at 0-based index `i`.
    #[inline]
    pub fn record(&self, i: usize, x: f64, levels: &[f64], out: &mut [u32]) {
        match levels.last() {
            Some(&lowest) if x > lowest => {}
            _ => return,
        }
        let regions = self.ranges.len();
        for (r, ranges) in self.ranges.iter().enumerate() {
            if ranges.iter().any(|&(lo, hi)| lo <= i && i < hi) {
                for (j, &u) in levels.iter().enumerate() {
                    if x > u {
                        out[j * regions + r] += 1;
                    }
                }
            }
        }
    }
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Empty("levels"));
    }
    if let Some(w) = levels.windows(2).find(|w| w[0] < w[1] || w[0].is_nan()) {
        return Err(Error::NonMonotoneLevels(format!("{} < {}", w[0], w[1])));
    }
    Ok(())
}

/// Entry `(j, r)` counts indices `i` with `X_i > u_j` and `i/n` in region `r`.
pub fn exceedance_counts(
    path: &[f64],
    levels: &[f64],
    regions: &[IntervalSet],
) -> Result<CountMatrix> {
    if path.is_empty() {
        return Err(Error::Empty("path"));
    }
    check_levels(levels)?;
    let index = RegionIndex::new(regions, path.len());
    let mut m = CountMatrix::zeros(levels.len(), regions.len());
    index.count_into(path, levels, &mut m.data);
    Ok(m)
}

/// `max{X_i : i/n in (a, b]}`.
pub fn restricted_max(path: &[f64], a: f64, b: f64) -> Result<f64> {
    let n = path.len();
    let lo = grid_points_at_or_below(a, n);
    let hi = grid_points_at_or_below(b, n);
    if lo >= hi {
        return Err(Error::Empty("no grid point i/n inside the interval"));
    }
    Ok(path[lo..hi]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatternPoint {
    pub position: f64,
    /// Smallest level index (1-based) whose process contains the point.
    pub level: usize,
}

/// Points on `(0, 1]` marked with the smallest level they belong to. A point
/// with level `j` belongs to every `N^(j')`, `j' >= j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointPattern {
    points: Vec<PatternPoint>,
    levels: usize,
}

impl PointPattern {
    pub fn new(mut points: Vec<PatternPoint>, levels: usize) -> Result<Self> {
        for p in &points {
            if !(p.position > 0.0 && p.position <= 1.0) {
                return Err(Error::invalid(format!(
                    "position {} outside (0, 1]",
                    p.position
                )));
            }
            if p.level == 0 || p.level > levels {
                return Err(Error::invalid(format!(
                    "level {} outside 1..={levels}",
                    p.level
                )));
            }
        }
        points.sort_by(|a, b| a.position.total_cmp(&b.position));
        Ok(PointPattern { points, levels })
    }

    pub fn points(&self) -> &[PatternPoint] {
        &self.points
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Counts of `N^(level)` (points with mark `<= level`) in each region.
    pub fn count_on(&self, level: usize, regions: &[IntervalSet]) -> Result<Vec<u64>> {
        if level == 0 || level > self.levels {
            return Err(Error::invalid(format!(
                "level {level} outside 1..={}",
                self.levels
            )));
        }
        Ok(regions
            .iter()
            .map(|r| {
                self.points
                    .iter()
                    .filter(|p| p.level <= level && r.contains(p.position))
                    .count() as u64
            })
            .collect())
    }
}

/// Draws the limiting multilevel process: Poisson(`tau_s`) points placed
/// uniformly on `(0, 1]`, then thinned level by level downwards.
pub fn simulate_limit_process<R: Rng + ?Sized>(
    levels: &LevelVector,
    rng: &mut R,
) -> Result<PointPattern> {
    let taus = levels.taus();
    let s = taus.len();
    let top = taus[s - 1];
    if !top.is_finite() {
        return Err(Error::InfiniteIntensity { x: f64::NAN });
    }
    let count = if top > 0.0 {
        let poisson = Poisson::new(top).map_err(|e| Error::invalid(e.to_string()))?;
        poisson.sample(rng) as usize
    } else {
        0
    };
    let mut points: Vec<PatternPoint> = (0..count)
        .map(|_| PatternPoint {
            position: 1.0 - rng.random::<f64>(),
            level: s,
        })
        .collect();
    for j in (1..s).rev() {
        // retain from level j+1 into level j
        let upper = taus[j];
        let keep = if upper == 0.0 {
            1.0
        } else {
            taus[j - 1] / upper
        };
        for p in points.iter_mut().filter(|p| p.level == j + 1) {
            if rng.random::<f64>() < keep {
                p.level = j;
            }
        }
    }
    PointPattern::new(points, s)
}

//! Distances and diagnostics: sup-norm gaps between gridded CDFs, total
//! variation between count laws, and the independence gap
//! `sup |F_joint - F_1 F_2|`.
//!
//! Empirical quantities are accumulated as integer counts so that partial
//! aggregates merge exactly; probabilities are formed only on output.

use serde::Serialize;

use crate::error::{Error, Result};

/// `P(N = m)` for `N ~ Poisson(lambda)`, `lambda >= 0`.
pub fn poisson_pmf(lambda: f64, m: u64) -> f64 {
    if lambda == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let mut lp = -lambda;
    for i in 1..=m {
        lp += (lambda / i as f64).ln();
    }
    lp.exp()
}

/// `[P(N = 0), ..., P(N = max)]`, built by the log-space recurrence.
pub fn poisson_pmf_table(lambda: f64, max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    if lambda == 0.0 {
        out.push(1.0);
        out.resize(max + 1, 0.0);
        return out;
    }
    let mut lp = -lambda;
    out.push(lp.exp());
    for i in 1..=max {
        lp += (lambda / i as f64).ln();
        out.push(lp.exp());
    }
    out
}

/// A distribution function tabulated on a sorted grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCdf {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridCdf {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::ShapeMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("grid must be sorted ascending"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid("CDF values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("CDF values must be nondecreasing"));
        }
        Ok(GridCdf { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_gap(&self, other: &GridCdf) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::invalid("CDFs are tabulated on different grids"));
        }
        sup_gap(&self.values, &other.values)
    }
}

/// Row-major matrix of probabilities, rows indexed by x and columns by y.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl ProbMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ProbMatrix { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn sup_gap(&self, other: &ProbMatrix) -> Result<f64> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch {
                left: self.rows,
                right: other.rows,
            });
        }
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                left: self.cols,
                right: other.cols,
            });
        }
        sup_gap(&self.data, &other.data)
    }
}

/// Largest absolute entrywise difference.
pub fn sup_gap(empirical: &[f64], exact: &[f64]) -> Result<f64> {
    if empirical.len() != exact.len() {
        return Err(Error::ShapeMismatch {
            left: empirical.len(),
            right: exact.len(),
        });
    }
    Ok(empirical
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Histogram of nonnegative integer counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CountHistogram {
    freq: Vec<u64>,
    total: u64,
}

impl CountHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, count: u32) {
        let c = count as usize;
        if c >= self.freq.len() {
            self.freq.resize(c + 1, 0);
        }
        self.freq[c] += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &CountHistogram) {
        if other.freq.len() > self.freq.len() {
            self.freq.resize(other.freq.len(), 0);
        }
        for (a, b) in self.freq.iter_mut().zip(&other.freq) {
            *a += b;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.freq
    }

    /// Normalized histogram; empty for an empty histogram.
    pub fn probabilities(&self) -> Vec<f64> {
        if self.total == 0 {
            return Vec::new();
        }
        let t = self.total as f64;
        self.freq.iter().map(|&f| f as f64 / t).collect()
    }
}

/// `1/2 * sum_c |p_hat(c) - p(c)|`, with the reference pmf summed until its
/// cumulative mass reaches `1 - 1e-12` (or the histogram support ends,
/// whichever is later).
pub fn tv_distance(histogram: &[f64], pmf: impl Fn(u64) -> f64) -> f64 {
    let mut total = 0.0;
    let mut cumulative = 0.0;
    let mut c = 0u64;
    loop {
        let in_support = (c as usize) < histogram.len();
        if !in_support && cumulative >= 1.0 - 1e-12 {
            break;
        }
        let p = pmf(c);
        let h = histogram.get(c as usize).copied().unwrap_or(0.0);
        total += (h - p).abs();
        cumulative += p;
        c += 1;
        // guards against a pmf that never reaches the cutoff
        if !in_support && c > 1_000_000 {
            break;
        }
    }
    (0.5 * total).min(1.0)
}

/// Total variation between an empirical law and a reference pmf, given the
/// pairs `(p_hat, p)` over the empirical support. Reference mass outside the
/// support is accounted for as `1 - sum p`.
pub fn tv_distance_on_support(pairs: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let (mut diff, mut covered) = (0.0, 0.0);
    for (h, p) in pairs {
        diff += (h - p).abs();
        covered += p;
    }
    (0.5 * (diff + (1.0 - covered).max(0.0))).min(1.0)
}

/// Pearson correlation; `0` when either coordinate is constant.
pub fn correlation(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::Empty("correlation sample"));
    }
    let n = pairs.len() as f64;
    let (mx, my) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / n, b + y / n));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Integer counts of `{X <= x_p, Y <= y_q}` over a grid, plus marginals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointCounts {
    x_len: usize,
    y_len: usize,
    /// corner[p * y_len + q]: observations whose first admissible cell is (p, q)
    corner: Vec<u64>,
    total: u64,
}

impl JointCounts {
    pub fn new(x_len: usize, y_len: usize) -> Self {
        JointCounts {
            x_len,
            y_len,
            corner: vec![0; (x_len + 1) * (y_len + 1)],
            total: 0,
        }
    }

    /// Records an observation given the index of the first grid point at or
    /// above each coordinate (`len` when the value exceeds the whole grid).
    pub fn add_indexed(&mut self, px: usize, qy: usize) {
        self.corner[px * (self.y_len + 1) + qy] += 1;
        self.total += 1;
    }

    pub fn add(&mut self, x: f64, y: f64, x_grid: &[f64], y_grid: &[f64]) {
        self.add_indexed(first_at_or_above(x_grid, x), first_at_or_above(y_grid, y));
    }

    pub fn merge(&mut self, other: &JointCounts) -> Result<()> {
        if self.corner.len() != other.corner.len() || self.y_len != other.y_len {
            return Err(Error::ShapeMismatch {
                left: self.corner.len(),
                right: other.corner.len(),
            });
        }
        for (a, b) in self.corner.iter_mut().zip(&other.corner) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// `cum[p][q]` = number of observations with `X <= x_p` and `Y <= y_q`.
    pub fn cumulative(&self) -> Vec<u64> {
        let w = self.y_len + 1;
        let mut cum = vec![0u64; self.x_len * self.y_len];
        for p in 0..self.x_len {
            for q in 0..self.y_len {
                let here = self.corner[p * w + q];
                let up = if p > 0 {
                    cum[(p - 1) * self.y_len + q]
                } else {
                    0
                };
                let left = if q > 0 {
                    cum[p * self.y_len + q - 1]
                } else {
                    0
                };
                let diag = if p > 0 && q > 0 {
                    cum[(p - 1) * self.y_len + q - 1]
                } else {
                    0
                };
                cum[p * self.y_len + q] = here + up + left - diag;
            }
        }
        cum
    }

    pub fn joint(&self) -> ProbMatrix {
        let cum = self.cumulative();
        let t = self.total.max(1) as f64;
        ProbMatrix {
            rows: self.x_len,
            cols: self.y_len,
            data: cum.iter().map(|&c| c as f64 / t).collect(),
        }
    }

    /// Marginal CDF of X on the x grid.
    pub fn x_marginal(&self) -> Vec<f64> {
        let w = self.y_len + 1;
        let t = self.total.max(1) as f64;
        let mut acc = 0u64;
        (0..self.x_len)
            .map(|p| {
                acc += self.corner[p * w..(p + 1) * w].iter().sum::<u64>();
                acc as f64 / t
            })
            .collect()
    }

    /// Marginal CDF of Y on the y grid.
    pub fn y_marginal(&self) -> Vec<f64> {
        let w = self.y_len + 1;
        let t = self.total.max(1) as f64;
        let mut acc = 0u64;
        (0..self.y_len)
            .map(|q| {
                acc += (0..=self.x_len)
                    .map(|p| self.corner[p * w + q])
                    .sum::<u64>();
                acc as f64 / t
            })
            .collect()
    }

    /// `sup |F_joint - F_X F_Y|` over the grid.
    pub fn independence_gap(&self) -> f64 {
        let joint = self.joint();
        let fx = self.x_marginal();
        let fy = self.y_marginal();
        let mut gap: f64 = 0.0;
        for (p, &mx) in fx.iter().enumerate() {
            for (q, &my) in fy.iter().enumerate() {
                gap = gap.max((joint.get(p, q) - mx * my).abs());
            }
        }
        gap
    }
}

/// Index of the first grid point `>= v`; `grid.len()` if none.
pub(crate) fn first_at_or_above(grid: &[f64], v: f64) -> usize {
    grid.partition_point(|&g| g < v)
}

/// `sup |F_joint - F_1 F_2|` for a sample of pairs on the given grids.
pub fn independence_gap(pairs: &[(f64, f64)], x_grid: &[f64], y_grid: &[f64]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("independence sample"));
    }
    check_sorted(x_grid)?;
    check_sorted(y_grid)?;
    let mut counts = JointCounts::new(x_grid.len(), y_grid.len());
    for &(x, y) in pairs {
        counts.add(x, y, x_grid, y_grid);
    }
    Ok(counts.independence_gap())
}

pub(crate) fn check_sorted(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|g| g.is_nan()) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("grid must be sorted ascending"));
    }
    Ok(())
}

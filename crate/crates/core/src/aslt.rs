//! Almost-sure (logarithmic-average) estimators along a single path.
//!
//! For cell `(x, y)` and order `j` the estimator after `N` steps is
//!
//! ```text
//! (1 / D_N) * sum_{n = n0}^{N} (1/n) I(a_n (M_n^(j) - b_n) <= x, S_n / sqrt(n) <= y)
//! ```
//!
//! with `D_N = sum_{n = n0}^{N} 1/n`. The top-k variant replaces the single
//! order statistic by the vector condition `M_n^(i) <= u_n(x_i)` for all `i`.

use serde::Serialize;

use crate::dist::{NormingConstants, StandardizedDistribution};
use crate::error::{Error, Result};
use crate::limits::{kth_max_joint_cdf, top_k_joint_cdf, EvLimit};
use crate::rng::child_rng;
use crate::topk::TopK;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cell {
    /// `order`-th maximum (1-based) at `x`, sum at `y`.
    Kth { order: usize, x: f64, y: f64 },
    /// `M^(i) <= x_i` for `i = 1..=xs.len()`, sum at `y`.
    TopK { xs: Vec<f64>, y: f64 },
}

impl Cell {
    fn needs(&self) -> usize {
        match self {
            Cell::Kth { order, .. } => *order,
            Cell::TopK { xs, .. } => xs.len(),
        }
    }

    /// Weak-limit value of the cell's probability.
    pub fn exact(&self, limit: &EvLimit) -> Result<f64> {
        match self {
            Cell::Kth { order, x, y } => Ok(kth_max_joint_cdf(limit, *order as u32, *x, *y)),
            Cell::TopK { xs, y } => top_k_joint_cdf(limit, xs, *y),
        }
    }

    #[inline]
    fn hit(&self, topk: &[f64], norm: &NormingConstants, s_norm: f64) -> bool {
        match self {
            Cell::Kth { order, x, y } => s_norm <= *y && norm.normalize(topk[order - 1]) <= *x,
            Cell::TopK { xs, y } => {
                s_norm <= *y && xs.iter().zip(topk).all(|(x, &m)| norm.normalize(m) <= *x)
            }
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Kth { order, x, y } => write!(f, "k={order};x={x};y={y}"),
            Cell::TopK { xs, y } => {
                let xs: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                write!(f, "top;x={};y={y}", xs.join("/"))
            }
        }
    }
}

/// Parses the [`Display`](std::fmt::Display) form: `k=2;x=0;y=0` or
/// `top;x=1/0;y=0`.
impl std::str::FromStr for Cell {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fail = |reason: &str| Error::Parse {
            what: "cell",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut top = false;
        let (mut order, mut xs, mut y) = (None, None, None);
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("top") {
                top = true;
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| fail("expected key=value"))?;
            match key.trim() {
                "k" => {
                    order = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| fail(&e.to_string()))?,
                    )
                }
                "x" => {
                    let parsed: std::result::Result<Vec<f64>, _> =
                        value.split('/').map(|v| v.trim().parse::<f64>()).collect();
                    xs = Some(parsed.map_err(|e| fail(&e.to_string()))?);
                }
                "y" => {
                    y = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|e| fail(&e.to_string()))?,
                    )
                }
                other => return Err(fail(&format!("unknown key {other:?}"))),
            }
        }
        let xs = xs.ok_or_else(|| fail("missing x"))?;
        let y = y.ok_or_else(|| fail("missing y"))?;
        if top {
            if order.is_some() {
                return Err(fail("top-k cells take no k"));
            }
            return Ok(Cell::TopK { xs, y });
        }
        match (order, xs.as_slice()) {
            (Some(order), &[x]) => Ok(Cell::Kth { order, x, y }),
            (None, _) => Err(fail("missing k")),
            _ => Err(fail("k-th maximum cells take a single x")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogAverageAccumulator {
    n: u64,
    n0: u64,
    top: TopK,
    sum: f64,
    weight: CompensatedSum,
    cells: Vec<Cell>,
    mass: Vec<CompensatedSum>,
}

impl LogAverageAccumulator {
    /// Tracks the `k` largest values; contributions start at
    /// `n0` (default `max(k, 2)`, never below `k`).
    pub fn new(k: usize, n0: Option<u64>, cells: Vec<Cell>) -> Result<Self> {
        if k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if let Some(bad) = cells.iter().find(|c| c.needs() < 1 || c.needs() > k) {
            return Err(Error::invalid(format!(
                "cell {bad} needs order statistics beyond k = {k}"
            )));
        }
        let n0 = n0.unwrap_or(2).max(k as u64).max(1);
        Ok(LogAverageAccumulator {
            n: 0,
            n0,
            top: TopK::new(k),
            sum: 0.0,
            weight: CompensatedSum::default(),
            mass: vec![CompensatedSum::default(); cells.len()],
            cells,
        })
    }

    /// Consumes `X_{n+1}`; `norm` must belong to the new length `n + 1`.
    pub fn update(&mut self, x: f64, norm: &NormingConstants) {
        self.n += 1;
        self.top.push(x);
        self.sum += x;
        if self.n < self.n0 {
            return;
        }
        let w = 1.0 / self.n as f64;
        self.weight.add(w);
        let s_norm = self.sum / (self.n as f64).sqrt();
        let topk = self.top.values();
        for (cell, mass) in self.cells.iter().zip(&mut self.mass) {
            if cell.hit(topk, norm, s_norm) {
                mass.add(w);
            }
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n0(&self) -> u64 {
        self.n0
    }

    /// `D_N`.
    pub fn weight_total(&self) -> f64 {
        self.weight.value()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Weighted indicator mass of cell `i`, in `[0, D_N]`.
    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i].value()
    }

    /// `mass / D_N`; `None` before any term was recorded.
    pub fn estimate(&self, i: usize) -> Option<f64> {
        let d = self.weight_total();
        (d > 0.0).then(|| (self.mass(i) / d).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsltConfig {
    pub dist: StandardizedDistribution,
    pub n_max: u64,
    pub k: usize,
    pub cells: Vec<Cell>,
    pub seed: u64,
    /// Child stream of `seed` the path is drawn from.
    pub stream: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: u64,
    pub cell: usize,
    pub estimate: f64,
    pub exact: f64,
    pub gap: f64,
}

/// Trace checkpoints: powers of ten from `10^3` inside `[n0, n_max]`, then
/// `n_max` itself.
pub fn checkpoints(n0: u64, n_max: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (3..=18)
        .map(|e| 10u64.pow(e))
        .filter(|&c| c >= n0 && c < n_max)
        .collect();
    out.push(n_max);
    out
}

/// Streams one path of length `n_max` and reports every cell at each
/// checkpoint.
pub fn aslt_run(config: &AsltConfig) -> Result<Vec<TraceRow>> {
    let mut acc = LogAverageAccumulator::new(config.k, None, config.cells.clone())?;
    if config.n_max < acc.n0() {
        return Err(Error::invalid(format!(
            "path length {} is below the first recorded index {}",
            config.n_max,
            acc.n0()
        )));
    }
    let limit = config.dist.limit();
    let exact: Vec<f64> = config
        .cells
        .iter()
        .map(|c| c.exact(&limit))
        .collect::<Result<_>>()?;
    let marks = checkpoints(acc.n0(), config.n_max);
    let mut rng = child_rng(config.seed, config.stream);
    let mut trace = Vec::with_capacity(marks.len() * exact.len());
    let mut next = marks.iter().peekable();
    for n in 1..=config.n_max {
        let norm = config.dist.norming_constants(n);
        acc.update(config.dist.sample(&mut rng), &norm);
        if next.peek() == Some(&&n) {
            next.next();
            for (i, &ex) in exact.iter().enumerate() {
                let est = acc.estimate(i).unwrap_or(0.0);
                trace.push(TraceRow {
                    n,
                    cell: i,
                    estimate: est,
                    exact: ex,
                    gap: (est - ex).abs(),
                });
            }
        }
    }
    Ok(trace)
}

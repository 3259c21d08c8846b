//! Monte Carlo over independent replications.
//!
//! Each replication draws an i.i.d. path of length `n` from its own child
//! stream, and records in one pass the normalized top-k order statistics
//! `a_n (M_n^(j) - b_n)`, the normalized sum `S_n / sqrt(n)` and the
//! exceedance counts of the configured levels over the configured regions.
//!
//! Replications are independent of scheduling: the dataset for indices
//! `0..R` is the same whether it is produced by one worker, many workers, or
//! several shards merged afterwards.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{default_x_grid, NormingConstants, StandardizedDistribution};
use crate::error::{Error, Result};
use crate::limits::LevelVector;
use crate::point_process::{IntervalSet, RegionIndex};
use crate::rng::child_rng;
use crate::stats::{check_sorted, first_at_or_above, CountHistogram, JointCounts, ProbMatrix};
use crate::topk::TopK;

/// Default y grid for the partial-sum coordinate.
pub const DEFAULT_Y_GRID: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// Default number of points in the x grid.
pub const DEFAULT_X_POINTS: usize = 21;

pub const DEFAULT_N: usize = 5000;
pub const DEFAULT_REPLICATIONS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dist: StandardizedDistribution,
    pub n: usize,
    pub replications: usize,
    pub k: usize,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// Normalized levels `x_1 >= ... >= x_s`; counted at `u_n(x_j)`.
    pub levels: Vec<f64>,
    pub regions: Vec<IntervalSet>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Default grids, top-3 order statistics, levels at intensities
    /// `(0.5, 1, 2)` and regions `(0,1]`, `(0,1/2]`, `(1/2,1]`.
    pub fn standard(
        dist: StandardizedDistribution,
        n: usize,
        replications: usize,
        seed: u64,
    ) -> Self {
        let limit = dist.limit();
        ExperimentConfig {
            dist,
            n,
            replications,
            k: 3,
            x_grid: default_x_grid(&limit, DEFAULT_X_POINTS),
            y_grid: DEFAULT_Y_GRID.to_vec(),
            levels: [0.5, 1.0, 2.0]
                .iter()
                .map(|&t| limit.level_for_tau(t))
                .collect(),
            regions: standard_regions(),
            master_seed: seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.n < self.k {
            return Err(Error::invalid(format!(
                "need n >= k, got n={} k={}",
                self.n, self.k
            )));
        }
        if self.replications < 1 {
            return Err(Error::invalid("replication count must be at least 1"));
        }
        check_sorted(&self.x_grid)?;
        check_sorted(&self.y_grid)?;
        if self.levels.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::NonMonotoneLevels(format!("{:?}", self.levels)));
        }
        Ok(())
    }

    /// Levels as a [`LevelVector`] under the limit law of `dist`.
    pub fn level_vector(&self) -> Result<LevelVector> {
        LevelVector::new(&self.dist.limit(), &self.levels)
    }
}

/// `(0,1]`, `(0,1/2]`, `(1/2,1]`.
pub fn standard_regions() -> Vec<IntervalSet> {
    vec![
        IntervalSet::unit(),
        IntervalSet::interval(0.0, 0.5).expect("valid"),
        IntervalSet::interval(0.5, 1.0).expect("valid"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationResult {
    /// `a_n (M_n^(j) - b_n)` for `j = 1..=k`, nonincreasing.
    pub topk: Vec<f64>,
    /// `S_n / sqrt(n)`.
    pub s_norm: f64,
    /// Level-by-region exceedance counts, row-major by level.
    pub counts: Vec<u32>,
}

/// Config-derived state shared read-only by all replications.
struct Prepared<'a> {
    config: &'a ExperimentConfig,
    norming: NormingConstants,
    thresholds: Vec<f64>,
    regions: RegionIndex,
    sqrt_n: f64,
}

impl<'a> Prepared<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let norming = config.dist.norming_constants(config.n as u64);
        Ok(Prepared {
            config,
            norming,
            thresholds: config.levels.iter().map(|&x| norming.level(x)).collect(),
            regions: RegionIndex::new(&config.regions, config.n),
            sqrt_n: (config.n as f64).sqrt(),
        })
    }

    fn run(&self, index: u64) -> ReplicationResult {
        let cfg = self.config;
        let mut rng = child_rng(cfg.master_seed, index);
        let mut top = TopK::new(cfg.k);
        let mut sum = 0.0;
        let mut counts = vec![0u32; cfg.levels.len() * cfg.regions.len()];
        for i in 0..cfg.n {
            let x = cfg.dist.sample(&mut rng);
            sum += x;
            top.push(x);
            self.regions.record(i, x, &self.thresholds, &mut counts);
        }
        ReplicationResult {
            topk: top
                .values()
                .iter()
                .map(|&m| self.norming.normalize(m))
                .collect(),
            s_norm: sum / self.sqrt_n,
            counts,
        }
    }
}

/// Runs replication `index` on its own child stream.
pub fn run_replication(config: &ExperimentConfig, index: u64) -> Result<ReplicationResult> {
    Ok(Prepared::new(config)?.run(index))
}

/// Replication results for a contiguous index range, in index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub start: u64,
    pub results: Vec<ReplicationResult>,
    pub k: usize,
    pub levels: usize,
    pub regions: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }

    /// Concatenates shards covering adjacent index ranges.
    pub fn merge(mut shards: Vec<Dataset>) -> Result<Dataset> {
        shards.sort_by_key(|d| d.start);
        let mut iter = shards.into_iter();
        let mut out = iter.next().ok_or(Error::Empty("no shards to merge"))?;
        for shard in iter {
            if shard.k != out.k || shard.levels != out.levels || shard.regions != out.regions {
                return Err(Error::invalid("shards come from different configurations"));
            }
            let expected = out.start + out.results.len() as u64;
            if shard.start != expected {
                return Err(Error::invalid(format!(
                    "shard starting at {} does not follow index {}",
                    shard.start, expected
                )));
            }
            out.results
                .try_reserve(shard.results.len())
                .map_err(|e| Error::Capacity(e.to_string()))?;
            out.results.extend(shard.results);
        }
        Ok(out)
    }

    /// `(a_n (M_n^(j) - b_n), S_n / sqrt(n))` pairs for order index `j` (1-based).
    pub fn kth_sum_pairs(&self, j: usize) -> Vec<(f64, f64)> {
        self.results
            .iter()
            .map(|r| (r.topk[j - 1], r.s_norm))
            .collect()
    }

    pub fn count(&self, result: &ReplicationResult, level: usize, region: usize) -> u32 {
        result.counts[level * self.regions + region]
    }
}

/// Runs replications `range` using at most `threads` workers (all available
/// when `None`).
pub fn run_shard(
    config: &ExperimentConfig,
    range: Range<u64>,
    threads: Option<usize>,
) -> Result<Dataset> {
    let prepared = Prepared::new(config)?;
    let len = (range.end.saturating_sub(range.start)) as usize;
    let mut results: Vec<ReplicationResult> = Vec::new();
    results
        .try_reserve_exact(len)
        .map_err(|e| Error::Capacity(format!("{len} replication records: {e}")))?;
    let work = |results: &mut Vec<ReplicationResult>| {
        results.par_extend(range.clone().into_par_iter().map(|i| prepared.run(i)));
    };
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::Capacity(e.to_string()))?;
            pool.install(|| work(&mut results));
        }
        None => work(&mut results),
    }
    Ok(Dataset {
        start: range.start,
        results,
        k: config.k,
        levels: config.levels.len(),
        regions: config.regions.len(),
    })
}

/// All `R` replications.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> Result<Dataset> {
    run_shard(config, 0..config.replications as u64, threads)
}

/// Integer counts behind [`empirical_joint_cdf`]; these merge exactly.
pub fn joint_counts(
    dataset: &Dataset,
    j: usize,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<JointCounts> {
    if j < 1 || j > dataset.k {
        return Err(Error::invalid(format!(
            "order index {j} outside 1..={}",
            dataset.k
        )));
    }
    check_sorted(x_grid)?;
    check_sorted(y_grid)?;
    let mut counts = JointCounts::new(x_grid.len(), y_grid.len());
    for r in &dataset.results {
        counts.add_indexed(
            first_at_or_above(x_grid, r.topk[j - 1]),
            first_at_or_above(y_grid, r.s_norm),
        );
    }
    Ok(counts)
}

/// Entry `(p, q)`: fraction of replications with `topk[j] <= x_p` and
/// `s_norm <= y_q`.
pub fn empirical_joint_cdf(
    dataset: &Dataset,
    j: usize,
    x_grid: &[f64],
    y_grid: &[f64],
) -> Result<ProbMatrix> {
    Ok(joint_counts(dataset, j, x_grid, y_grid)?.joint())
}

/// Fraction of replications satisfying `pred`.
pub fn empirical_probability(dataset: &Dataset, pred: impl Fn(&ReplicationResult) -> bool) -> f64 {
    if dataset.is_empty() {
        return 0.0;
    }
    dataset.results.iter().filter(|r| pred(r)).count() as f64 / dataset.len() as f64
}

/// Rows: threshold vectors `(x_1, ..., x_m)`, `m <= k`; columns: `y_grid`.
/// Entry: fraction with `topk[j] <= x_j` for all `j <= m` and `s_norm <= y`.
pub fn empirical_topk_joint_cdf(
    dataset: &Dataset,
    xs: &[Vec<f64>],
    y_grid: &[f64],
) -> Result<ProbMatrix> {
    if let Some(bad) = xs.iter().find(|v| v.is_empty() || v.len() > dataset.k) {
        return Err(Error::invalid(format!(
            "threshold vector of length {} incompatible with k = {}",
            bad.len(),
            dataset.k
        )));
    }
    Ok(ProbMatrix::from_fn(xs.len(), y_grid.len(), |p, q| {
        let (v, y) = (&xs[p], y_grid[q]);
        empirical_probability(dataset, |r| {
            r.s_norm <= y && v.iter().zip(&r.topk).all(|(x, m)| m <= x)
        })
    }))
}

/// Histogram of the count at `level` (0-based) in `region` (0-based).
pub fn empirical_count_law(
    dataset: &Dataset,
    level: usize,
    region: usize,
) -> Result<CountHistogram> {
    if level >= dataset.levels || region >= dataset.regions {
        return Err(Error::invalid(format!(
            "level {level} / region {region} outside {}x{}",
            dataset.levels, dataset.regions
        )));
    }
    let mut h = CountHistogram::new();
    for r in &dataset.results {
        h.add(dataset.count(r, level, region));
    }
    Ok(h)
}

/// Joint histogram of the counts at `level` in two regions.
pub fn empirical_pair_count_law(
    dataset: &Dataset,
    level: usize,
    regions: (usize, usize),
) -> Result<std::collections::BTreeMap<(u32, u32), u64>> {
    if level >= dataset.levels || regions.0 >= dataset.regions || regions.1 >= dataset.regions {
        return Err(Error::invalid("level or region index out of range"));
    }
    let mut out = std::collections::BTreeMap::new();
    for r in &dataset.results {
        let key = (
            dataset.count(r, level, regions.0),
            dataset.count(r, level, regions.1),
        );
        *out.entry(key).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dist: &str, n: usize, reps: usize, k: usize) -> ExperimentConfig {
        let mut c = ExperimentConfig::standard(dist.parse().unwrap(), n, reps, 99);
        c.k = k;
        c
    }

    #[test]
    fn replication_is_deterministic() {
        let c = small("exp", 200, 10, 3);
        assert_eq!(
            run_replication(&c, 4).unwrap(),
            run_replication(&c, 4).unwrap()
        );
        assert_ne!(
            run_replication(&c, 4).unwrap(),
            run_replication(&c, 5).unwrap()
        );
    }

    #[test]
    fn n_equals_k_gives_full_sorted_path() {
        let c = small("uniform", 4, 1, 4);
        let r = run_replication(&c, 0).unwrap();
        let norm = c.dist.norming_constants(4);
        let mut rng = child_rng(c.master_seed, 0);
        let mut path: Vec<f64> = (0..4).map(|_| c.dist.sample(&mut rng)).collect();
        path.sort_by(|a, b| b.total_cmp(a));
        let expect: Vec<f64> = path.iter().map(|&m| norm.normalize(m)).collect();
        assert_eq!(r.topk, expect);
        let s: f64 = {
            let mut rng = child_rng(c.master_seed, 0);
            (0..4).map(|_| c.dist.sample(&mut rng)).sum()
        };
        assert_eq!(r.s_norm, s / 2.0);
    }

    #[test]
    fn topk_nonincreasing_and_counts_nested() {
        let mut c = small("pareto:alpha=3", 300, 50, 5);
        c.x_grid = vec![0.0, 0.0];
        let d = run_experiment(&c, Some(1)).unwrap();
        for r in &d.results {
            assert!(r.topk.windows(2).all(|w| w[0] >= w[1]));
            for reg in 0..d.regions {
                for lvl in 1..d.levels {
                    assert!(d.count(r, lvl - 1, reg) <= d.count(r, lvl, reg));
                }
                assert_eq!(d.count(r, 0, 0), d.count(r, 0, 1) + d.count(r, 0, 2));
            }
        }
    }

    #[test]
    fn r_one_equals_single_replication() {
        let c = small("normal", 100, 1, 2);
        let d = run_experiment(&c, None).unwrap();
        assert_eq!(d.results, vec![run_replication(&c, 0).unwrap()]);
    }

    #[test]
    fn shards_merge_to_whole_and_threads_do_not_matter() {
        let c = small("exp", 100, 400, 3);
        let whole = run_experiment(&c, Some(1)).unwrap();
        let parallel = run_experiment(&c, Some(4)).unwrap();
        assert_eq!(whole, parallel);
        let shards = vec![
            run_shard(&c, 300..400, Some(2)).unwrap(),
            run_shard(&c, 0..100, None).unwrap(),
            run_shard(&c, 100..300, Some(3)).unwrap(),
        ];
        let merged = Dataset::merge(shards).unwrap();
        assert_eq!(merged, whole);

        let mut parts = Vec::new();
        for range in [0..150u64, 150..400] {
            let d = run_shard(&c, range, None).unwrap();
            parts.push(joint_counts(&d, 2, &c.x_grid, &c.y_grid).unwrap());
        }
        let (a, b) = (parts.remove(0), parts.remove(0));
        let mut merged_counts = b.clone();
        merged_counts.merge(&a).unwrap();
        assert_eq!(
            merged_counts,
            joint_counts(&whole, 2, &c.x_grid, &c.y_grid).unwrap()
        );
    }

    #[test]
    fn gapped_shards_are_rejected() {
        let c = small("exp", 50, 10, 1);
        let a = run_shard(&c, 0..3, None).unwrap();
        let b = run_shard(&c, 5..10, None).unwrap();
        assert!(Dataset::merge(vec![a, b]).is_err());
        assert!(Dataset::merge(vec![]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = small("exp", 10, 5, 3);
        c.n = 2;
        assert!(run_experiment(&c, None).is_err());
        let mut c = small("exp", 10, 5, 3);
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = small("exp", 10, 5, 3);
        c.y_grid = vec![1.0, 0.0];
        assert!(c.validate().is_err());
        let mut c = small("exp", 10, 5, 3);
        c.levels = vec![0.0, 1.0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn empirical_cdf_edge_cases() {
        let c = small("exp", 100, 200, 2);
        let d = run_experiment(&c, None).unwrap();
        let huge = empirical_joint_cdf(&d, 1, &[1e300], &[1e300]).unwrap();
        assert_eq!(huge.data, vec![1.0]);
        let m = empirical_joint_cdf(&d, 2, &c.x_grid, &c.y_grid).unwrap();
        for p in 0..m.rows {
            for q in 0..m.cols {
                if p > 0 {
                    assert!(m.get(p, q) >= m.get(p - 1, q));
                }
                if q > 0 {
                    assert!(m.get(p, q) >= m.get(p, q - 1));
                }
            }
        }
        assert!(empirical_joint_cdf(&d, 3, &c.x_grid, &c.y_grid).is_err());

        // identical replications give a 0/1 step matrix
        let one = d.results[0].clone();
        let same = Dataset {
            results: vec![one.clone(); 10],
            ..d.clone()
        };
        let xs = [one.topk[0] - 1.0, one.topk[0], one.topk[0] + 1.0];
        let ys = [one.s_norm - 1.0, one.s_norm + 1.0];
        let step = empirical_joint_cdf(&same, 1, &xs, &ys).unwrap();
        assert_eq!(step.data, vec![0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_length_region_has_all_mass_at_zero() {
        let mut c = small("exp", 100, 300, 1);
        c.regions = vec![IntervalSet::interval(0.5, 0.5).unwrap()];
        let d = run_experiment(&c, None).unwrap();
        let h = empirical_count_law(&d, 1, 0).unwrap();
        assert_eq!(h.frequencies(), &[300]);
    }

    #[test]
    fn topk_joint_matches_single_coordinate() {
        let c = small("exp", 200, 500, 3);
        let d = run_experiment(&c, None).unwrap();
        let xs: Vec<Vec<f64>> = c.x_grid.iter().map(|&x| vec![x]).collect();
        let a = empirical_topk_joint_cdf(&d, &xs, &c.y_grid).unwrap();
        let b = empirical_joint_cdf(&d, 1, &c.x_grid, &c.y_grid).unwrap();
        assert_eq!(a, b);
        assert!(empirical_topk_joint_cdf(&d, &[vec![0.0; 4]], &c.y_grid).is_err());
    }
}

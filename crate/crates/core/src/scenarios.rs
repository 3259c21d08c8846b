//! Named end-to-end checks comparing simulation output with the exact limit
//! laws. Each check reports a distance, its threshold and the verdict.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::aslt::{aslt_run, AsltConfig, Cell};
use crate::dist::{catalog, default_x_grid, BaseDistribution, StandardizedDistribution};
use crate::engine::{
    empirical_count_law, empirical_joint_cdf, empirical_pair_count_law, empirical_probability,
    empirical_topk_joint_cdf, joint_counts, run_experiment, Dataset, ExperimentConfig, DEFAULT_N,
    DEFAULT_REPLICATIONS,
};
use crate::error::{Error, Result};
use crate::limits::{
    count_constraint_prob, kth_max_joint_cdf, std_normal_cdf, top_k_joint_cdf, two_level_joint_cdf,
    EvLimit, LevelVector,
};
use crate::point_process::{simulate_limit_process, IntervalSet};
use crate::rng::{child_rng, DEFAULT_SEED};
use crate::stats::{
    correlation, poisson_pmf, tv_distance, tv_distance_on_support, CountHistogram, ProbMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ExactLaws,
    KthMax,
    Counts,
    Thinning,
    TopK,
    Independence,
    Aslt,
    Norming,
    Determinism,
    TwoLevel,
}

impl Scenario {
    /// In acceptance order.
    pub const ALL: [Scenario; 10] = [
        Scenario::ExactLaws,
        Scenario::KthMax,
        Scenario::Counts,
        Scenario::Thinning,
        Scenario::TopK,
        Scenario::Independence,
        Scenario::Aslt,
        Scenario::Norming,
        Scenario::Determinism,
        Scenario::TwoLevel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::ExactLaws => "exact-laws",
            Scenario::KthMax => "kth-max",
            Scenario::Counts => "counts",
            Scenario::Thinning => "thinning",
            Scenario::TopK => "top-k",
            Scenario::Independence => "independence",
            Scenario::Aslt => "aslt",
            Scenario::Norming => "norming",
            Scenario::Determinism => "determinism",
            Scenario::TwoLevel => "two-level",
        }
    }

    fn aliases(self) -> &'static [&'static str] {
        match self {
            Scenario::ExactLaws => &["dp"],
            Scenario::KthMax => &["thm2_3"],
            Scenario::Counts => &["thm2_1"],
            Scenario::Thinning => &["thm2_4"],
            Scenario::TopK => &["thm2_5"],
            Scenario::Independence => &["indep"],
            Scenario::Aslt => &["thm3_1"],
            Scenario::Norming => &["fact"],
            Scenario::Determinism => &["det"],
            Scenario::TwoLevel => &["cor2_6"],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == key || sc.aliases().iter().any(|a| a.replace('_', "-") == key))
            .ok_or_else(|| Error::Parse {
                what: "scenario",
                input: s.to_string(),
                reason: format!(
                    "expected one of {}",
                    Scenario::ALL.map(|sc| sc.name()).join(", ")
                ),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub scenario: Scenario,
    pub metric: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(scenario: Scenario, metric: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            scenario,
            metric: metric.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {} = {:.6} (threshold {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.scenario,
            self.metric,
            self.value,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub threads: Option<usize>,
    pub aslt_n: u64,
    pub aslt_paths: u64,
    pub pp_draws: u64,
    pub norming_n: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n: DEFAULT_N,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
            threads: None,
            aslt_n: 1_000_000,
            aslt_paths: 16,
            pp_draws: 100_000,
            norming_n: 100_000,
        }
    }
}

const TOL: f64 = 0.02;
const EXACT_TOL: f64 = 1e-10;
const ASLT_TOL: f64 = 0.05;
const NORMING_REL_TOL: f64 = 0.05;
const PP_TOL: f64 = 0.01;
const PAIR_TOL: f64 = 0.03;

/// Normal samples converge markedly slower; their tolerance is doubled.
fn tolerance(dist: &StandardizedDistribution, base: f64) -> f64 {
    match dist.base() {
        BaseDistribution::StdNormal => 2.0 * base,
        _ => base,
    }
}

fn short_name(dist: &StandardizedDistribution) -> String {
    dist.base().to_string()
}

/// Runs scenarios, simulating each catalog dataset at most once.
pub struct Verifier {
    config: VerifyConfig,
    datasets: HashMap<String, (ExperimentConfig, Dataset)>,
}

impl Verifier {
    pub fn new(config: VerifyConfig) -> Self {
        Verifier {
            config,
            datasets: HashMap::new(),
        }
    }

    pub fn config(&self) -> &VerifyConfig {
        &self.config
    }

    fn dataset(&mut self, dist: &StandardizedDistribution) -> Result<&(ExperimentConfig, Dataset)> {
        let key = short_name(dist);
        if !self.datasets.contains_key(&key) {
            let cfg = ExperimentConfig::standard(
                *dist,
                self.config.n,
                self.config.replications,
                self.config.seed,
            );
            let data = run_experiment(&cfg, self.config.threads)?;
            self.datasets.insert(key.clone(), (cfg, data));
        }
        Ok(&self.datasets[&key])
    }

    pub fn run(&mut self, scenario: Scenario) -> Result<Vec<Check>> {
        match scenario {
            Scenario::ExactLaws => exact_laws(),
            Scenario::KthMax => self.kth_max(),
            Scenario::Counts => self.counts(),
            Scenario::Thinning => self.thinning(),
            Scenario::TopK => self.top_k(),
            Scenario::Independence => self.independence(),
            Scenario::Aslt => self.aslt(),
            Scenario::Norming => self.norming(),
            Scenario::Determinism => self.determinism(),
            Scenario::TwoLevel => self.two_level(),
        }
    }

    fn kth_max(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for dist in catalog() {
            let limit = dist.limit();
            let tol = tolerance(&dist, TOL);
            let (cfg, data) = self.dataset(&dist)?;
            for k in 1..=3 {
                let emp = empirical_joint_cdf(data, k, &cfg.x_grid, &cfg.y_grid)?;
                let exact = ProbMatrix::from_fn(cfg.x_grid.len(), cfg.y_grid.len(), |p, q| {
                    kth_max_joint_cdf(&limit, k as u32, cfg.x_grid[p], cfg.y_grid[q])
                });
                let metric = format!("sup_gap[{},k={k}]", short_name(&dist));
                out.push(Check::new(
                    Scenario::KthMax,
                    metric,
                    emp.sup_gap(&exact)?,
                    tol,
                ));
            }
        }
        Ok(out)
    }

    fn counts(&mut self) -> Result<Vec<Check>> {
        // standard levels sit at intensities (0.5, 1, 2); index 1 is tau = 1
        const LEVEL: usize = 1;
        let corr_tol = 3.0 / (self.config.replications as f64).sqrt();
        let mut out = Vec::new();
        for dist in catalog() {
            let tol = tolerance(&dist, TOL);
            let name = short_name(&dist);
            let (cfg, data) = self.dataset(&dist)?;
            let tau = cfg.level_vector()?.taus()[LEVEL];
            for region in 0..2 {
                let len = cfg.regions[region].length();
                let hist = empirical_count_law(data, LEVEL, region)?;
                let tv = tv_distance(&hist.probabilities(), |c| poisson_pmf(tau * len, c));
                out.push(Check::new(
                    Scenario::Counts,
                    format!("tv[{name},region={}]", cfg.regions[region]),
                    tv,
                    tol,
                ));
            }
            let pairs: Vec<(f64, f64)> = data
                .results
                .iter()
                .map(|r| {
                    (
                        data.count(r, LEVEL, 1) as f64,
                        data.count(r, LEVEL, 2) as f64,
                    )
                })
                .collect();
            out.push(Check::new(
                Scenario::Counts,
                format!("abs_corr[{name},disjoint halves]"),
                correlation(&pairs)?.abs(),
                corr_tol,
            ));
            let joint = empirical_pair_count_law(data, LEVEL, (1, 2))?;
            let total = data.len() as f64;
            let (l1, l2) = (cfg.regions[1].length(), cfg.regions[2].length());
            let tv = tv_distance_on_support(joint.iter().map(|(&(a, b), &f)| {
                (
                    f as f64 / total,
                    poisson_pmf(tau * l1, a as u64) * poisson_pmf(tau * l2, b as u64),
                )
            }));
            out.push(Check::new(
                Scenario::Counts,
                format!("pair_tv[{name},disjoint halves]"),
                tv,
                tolerance(&dist, PAIR_TOL),
            ));
        }
        Ok(out)
    }

    fn thinning(&mut self) -> Result<Vec<Check>> {
        let limit = EvLimit::Gumbel;
        let xs: Vec<f64> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&t| limit.level_for_tau(t))
            .collect();
        let levels = LevelVector::new(&limit, &xs)?;
        let unit = [IntervalSet::unit()];
        let seed = self.config.seed;
        let draws = self.config.pp_draws;
        let s = levels.len();
        let per_draw = |i: u64| -> Result<(Vec<u32>, bool)> {
            let mut rng = child_rng(seed, i);
            let pattern = simulate_limit_process(&levels, &mut rng)?;
            let counts: Vec<u32> = (1..=s)
                .map(|j| pattern.count_on(j, &unit).map(|c| c[0] as u32))
                .collect::<Result<_>>()?;
            Ok((counts.clone(), counts.windows(2).all(|w| w[0] <= w[1])))
        };
        let rows: Vec<(Vec<u32>, bool)> = self.install(|| {
            (0..draws)
                .into_par_iter()
                .map(per_draw)
                .collect::<Result<Vec<_>>>()
        })?;
        let mut out = Vec::new();
        for j in 0..s {
            let mut h = CountHistogram::new();
            rows.iter().for_each(|(c, _)| h.add(c[j]));
            let tau = levels.taus()[j];
            let tv = tv_distance(&h.probabilities(), |c| poisson_pmf(tau, c));
            out.push(Check::new(
                Scenario::Thinning,
                format!("tv[level={}]", j + 1),
                tv,
                PP_TOL,
            ));
        }
        let broken = rows.iter().filter(|(_, nested)| !nested).count();
        out.push(Check::new(
            Scenario::Thinning,
            "nesting_violations",
            broken as f64,
            0.0,
        ));
        Ok(out)
    }

    fn top_k(&mut self) -> Result<Vec<Check>> {
        let dist: StandardizedDistribution = BaseDistribution::exponential(1.0)?.standardize()?;
        let limit = dist.limit();
        let marks: Vec<f64> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&p| limit.quantile(p))
            .collect();
        let mut xs = Vec::new();
        for &a in &marks {
            for &b in &marks {
                for &c in &marks {
                    xs.push(vec![a, b, c]);
                }
            }
        }
        let (cfg, data) = self.dataset(&dist)?;
        let emp = empirical_topk_joint_cdf(data, &xs, &cfg.y_grid)?;
        let mut exact = vec![0.0; xs.len() * cfg.y_grid.len()];
        for (p, v) in xs.iter().enumerate() {
            for (q, &y) in cfg.y_grid.iter().enumerate() {
                exact[p * cfg.y_grid.len() + q] = top_k_joint_cdf(&limit, v, y)?;
            }
        }
        let exact = ProbMatrix::from_fn(xs.len(), cfg.y_grid.len(), |p, q| {
            exact[p * cfg.y_grid.len() + q]
        });
        Ok(vec![Check::new(
            Scenario::TopK,
            "sup_gap[exp,top-3]",
            emp.sup_gap(&exact)?,
            TOL,
        )])
    }

    fn independence(&mut self) -> Result<Vec<Check>> {
        let dist: StandardizedDistribution = BaseDistribution::exponential(1.0)?.standardize()?;
        let (cfg, data) = self.dataset(&dist)?;
        let mut out = Vec::new();
        for k in 1..=3 {
            let gap = joint_counts(data, k, &cfg.x_grid, &cfg.y_grid)?.independence_gap();
            out.push(Check::new(
                Scenario::Independence,
                format!("gap[exp,k={k}]"),
                gap,
                TOL,
            ));
        }
        // count at the tau = 1 level against the sum indicator
        let mut gap: f64 = 0.0;
        for c in 0..=3u32 {
            let pc = empirical_probability(data, |r| data.count(r, 1, 0) <= c);
            for &y in &cfg.y_grid {
                let py = empirical_probability(data, |r| r.s_norm <= y);
                let pj = empirical_probability(data, |r| data.count(r, 1, 0) <= c && r.s_norm <= y);
                gap = gap.max((pj - pc * py).abs());
            }
        }
        out.push(Check::new(
            Scenario::Independence,
            "gap[exp,count vs sum]",
            gap,
            TOL,
        ));
        Ok(out)
    }

    fn aslt(&mut self) -> Result<Vec<Check>> {
        let cells = vec![
            Cell::Kth {
                order: 2,
                x: 0.0,
                y: 0.0,
            },
            Cell::Kth {
                order: 2,
                x: 1.0,
                y: 0.0,
            },
            Cell::Kth {
                order: 2,
                x: 0.0,
                y: 1.0,
            },
            Cell::TopK {
                xs: vec![1.0, 0.0],
                y: 0.0,
            },
        ];
        let base = AsltConfig {
            dist: BaseDistribution::exponential(1.0)?.standardize()?,
            n_max: self.config.aslt_n,
            k: 2,
            cells: cells.clone(),
            seed: self.config.seed,
            stream: 0,
        };
        let traces: Vec<Vec<f64>> = self.install(|| {
            (0..self.config.aslt_paths)
                .into_par_iter()
                .map(|stream| {
                    let trace = aslt_run(&AsltConfig {
                        stream,
                        ..base.clone()
                    })?;
                    let last = trace.last().map(|r| r.n).unwrap_or(0);
                    Ok(trace
                        .iter()
                        .filter(|r| r.n == last)
                        .map(|r| r.gap)
                        .collect())
                })
                .collect::<Result<Vec<_>>>()
        })?;
        Ok(cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let gaps: Vec<f64> = traces.iter().map(|t| t[i]).collect();
                Check::new(
                    Scenario::Aslt,
                    format!("median_gap[{cell}]"),
                    median(gaps),
                    ASLT_TOL,
                )
            })
            .collect())
    }

    fn norming(&mut self) -> Result<Vec<Check>> {
        let n = self.config.norming_n;
        Ok(catalog()
            .into_iter()
            .map(|dist| {
                let limit = dist.limit();
                let worst = default_x_grid(&limit, crate::engine::DEFAULT_X_POINTS)
                    .into_iter()
                    .map(|x| {
                        let tau = limit.tau(x);
                        (dist.validate_norming(n, x) - tau).abs() / tau
                    })
                    .fold(0.0, f64::max);
                Check::new(
                    Scenario::Norming,
                    format!("max_rel_err[{},n={n}]", short_name(&dist)),
                    worst,
                    NORMING_REL_TOL,
                )
            })
            .collect())
    }

    fn determinism(&mut self) -> Result<Vec<Check>> {
        let dist: StandardizedDistribution = BaseDistribution::exponential(1.0)?.standardize()?;
        let cfg = ExperimentConfig::standard(dist, 1000, 2000, self.config.seed);
        let single = run_experiment(&cfg, Some(1))?;
        let mut mismatches = 0;
        for threads in [2, 4] {
            if run_experiment(&cfg, Some(threads))? != single {
                mismatches += 1;
            }
        }
        let aslt = AsltConfig {
            dist,
            n_max: 50_000,
            k: 2,
            cells: vec![Cell::Kth {
                order: 2,
                x: 0.0,
                y: 0.0,
            }],
            seed: self.config.seed,
            stream: 0,
        };
        if aslt_run(&aslt)? != aslt_run(&aslt)? {
            mismatches += 1;
        }
        Ok(vec![Check::new(
            Scenario::Determinism,
            "mismatched_reruns",
            mismatches as f64,
            0.0,
        )])
    }

    fn two_level(&mut self) -> Result<Vec<Check>> {
        let mut out = exact_laws()?;
        for c in &mut out {
            c.scenario = Scenario::TwoLevel;
        }
        let dist: StandardizedDistribution = BaseDistribution::exponential(1.0)?.standardize()?;
        let limit = dist.limit();
        let marks: Vec<f64> = [0.75, 0.5, 0.25]
            .iter()
            .map(|&p| limit.quantile(p))
            .collect();
        let (cfg, data) = self.dataset(&dist)?;
        let mut gap: f64 = 0.0;
        for (k, l) in [(1usize, 2usize), (1, 3), (2, 3)] {
            for (i, &x1) in marks.iter().enumerate() {
                for &x2 in &marks[i..] {
                    for &y in &cfg.y_grid {
                        let exact = two_level_joint_cdf(&limit, k as u32, l as u32, x1, x2, y)?;
                        let emp = empirical_probability(data, |r| {
                            r.topk[k - 1] <= x1 && r.topk[l - 1] <= x2 && r.s_norm <= y
                        });
                        gap = gap.max((emp - exact).abs());
                    }
                }
            }
        }
        out.push(Check::new(
            Scenario::TwoLevel,
            "sup_gap[exp,two-level]",
            gap,
            TOL,
        ));
        Ok(out)
    }

    fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        match self.config.threads {
            Some(t) => match rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
            {
                Ok(pool) => pool.install(f),
                Err(_) => f(),
            },
            None => f(),
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Points `x1 >= x2` on a 3x3 layout of G-quantiles: `x2` at `p2`, `x1` at
/// `p2 + d (1 - p2)`.
pub fn two_level_grid(limit: &EvLimit) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(9);
    for p2 in [0.1, 0.4, 0.7] {
        for d in [0.0, 0.5, 0.9] {
            let p1 = p2 + d * (1.0 - p2);
            out.push((limit.quantile(p1), limit.quantile(p2)));
        }
    }
    out
}

/// Largest difference between the count recursion and the closed form over
/// `1 <= k < l <= 5`, the 3x3 grid and `y` in `{-1, 0, 1, +inf}`.
pub fn dp_closed_form_gap(limit: &EvLimit) -> Result<f64> {
    let mut gap: f64 = 0.0;
    for k in 1..=5u32 {
        for l in k + 1..=5 {
            for (x1, x2) in two_level_grid(limit) {
                let levels = LevelVector::new(limit, &[x1, x2])?;
                let dp = count_constraint_prob(&levels, &[k - 1, l - 1])?;
                for y in [-1.0, 0.0, 1.0, f64::INFINITY] {
                    let cf = two_level_joint_cdf(limit, k, l, x1, x2, y)?;
                    gap = gap.max((dp * std_normal_cdf(y) - cf).abs());
                }
            }
        }
    }
    Ok(gap)
}

fn exact_laws() -> Result<Vec<Check>> {
    [
        EvLimit::Gumbel,
        EvLimit::frechet(3.0)?,
        EvLimit::weibull(1.0)?,
    ]
    .iter()
    .map(|limit| {
        Ok(Check::new(
            Scenario::ExactLaws,
            format!("dp_vs_closed_form[{limit}]"),
            dp_closed_form_gap(limit)?,
            EXACT_TOL,
        ))
    })
    .collect()
}

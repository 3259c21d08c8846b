use evsum::engine::{
    empirical_count_law, joint_counts, run_experiment, run_shard, Dataset, ExperimentConfig,
};
use evsum::stats::{independence_gap, JointCounts};
use evsum::{child_rng, StandardizedDistribution};
use rand::Rng;

fn config(dist: &str, n: usize, reps: usize) -> ExperimentConfig {
    let dist: StandardizedDistribution = dist.parse().unwrap();
    ExperimentConfig::standard(dist, n, reps, 2024)
}

#[test]
fn normalized_sum_is_centred() {
    let c = config("exp", 1000, 10_000);
    let d = run_experiment(&c, None).unwrap();
    let mean = d.results.iter().map(|r| r.s_norm).sum::<f64>() / d.len() as f64;
    assert!(mean.abs() <= 3.0 / (d.len() as f64).sqrt(), "mean {mean}");
    let var = d
        .results
        .iter()
        .map(|r| (r.s_norm - mean).powi(2))
        .sum::<f64>()
        / d.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn four_shards_merge_to_the_unsharded_aggregate() {
    let c = config("pareto:alpha=3", 500, 10_000);
    let whole = run_experiment(&c, None).unwrap();
    let bounds = [0u64, 2500, 5000, 7500, 10_000];
    let shards: Vec<Dataset> = bounds
        .windows(2)
        .rev()
        .map(|w| run_shard(&c, w[0]..w[1], Some(2)).unwrap())
        .collect();
    let mut merged_counts = JointCounts::new(c.x_grid.len(), c.y_grid.len());
    for s in &shards {
        merged_counts
            .merge(&joint_counts(s, 3, &c.x_grid, &c.y_grid).unwrap())
            .unwrap();
    }
    assert_eq!(
        merged_counts,
        joint_counts(&whole, 3, &c.x_grid, &c.y_grid).unwrap()
    );
    assert_eq!(Dataset::merge(shards).unwrap(), whole);
}

#[test]
fn count_histograms_merge_exactly() {
    let c = config("uniform", 400, 3000);
    let whole = run_experiment(&c, None).unwrap();
    let mut merged = empirical_count_law(&run_shard(&c, 0..1000, None).unwrap(), 2, 0).unwrap();
    merged.merge(&empirical_count_law(&run_shard(&c, 1000..3000, None).unwrap(), 2, 0).unwrap());
    assert_eq!(merged, empirical_count_law(&whole, 2, 0).unwrap());
}

#[test]
fn independent_synthetic_pair_has_small_gap() {
    let mut rng = child_rng(3, 0);
    let pairs: Vec<(f64, f64)> = (0..50_000)
        .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let gap = independence_gap(&pairs, &grid, &grid).unwrap();
    assert!(gap <= 0.02, "gap {gap}");
}

#[test]
fn perfectly_dependent_pair_gap_at_median() {
    let pairs: Vec<(f64, f64)> = (0..1000).map(|i| (i as f64, i as f64)).collect();
    let gap = independence_gap(&pairs, &[499.5], &[499.5]).unwrap();
    assert!((gap - 0.25).abs() < 1e-12);
}

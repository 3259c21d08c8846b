//! Acceptance gate: one test per criterion. Every check and a per-criterion
//! verdict are written to stderr, so the report shows even without
//! `--nocapture`.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::sync::{LazyLock, Mutex};
use std::time::{Duration, Instant};

use evsum::aslt::{aslt_run, AsltConfig, Cell};
use evsum::scenarios::{Check, Scenario, Verifier, VerifyConfig};
use evsum::BaseDistribution;

static VERIFIER: LazyLock<Mutex<Verifier>> =
    LazyLock::new(|| Mutex::new(Verifier::new(VerifyConfig::default())));

/// Written straight to stderr so the lines show up even for passing tests.
fn report(criterion: u32, checks: &[Check]) {
    let mut err = std::io::stderr().lock();
    for c in checks {
        let _ = writeln!(
            err,
            "criterion {criterion}: {} {} = {:.6} (threshold {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.metric,
            c.value,
            c.threshold
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.metric.as_str())
        .collect();
    let _ = writeln!(
        err,
        "criterion {criterion}: {} ({} of {} checks pass)",
        if failed.is_empty() { "PASS" } else { "FAIL" },
        checks.len() - failed.len(),
        checks.len()
    );
    drop(err);
    assert!(
        failed.is_empty(),
        "criterion {criterion} failed: {failed:?}"
    );
}

fn run(scenario: Scenario) -> Vec<Check> {
    let mut v = VERIFIER.lock().unwrap_or_else(|e| e.into_inner());
    v.run(scenario).expect("scenario runs")
}

fn timing(scenario: Scenario, metric: &str, took: Duration, limit: Duration) -> Check {
    Check {
        scenario,
        metric: metric.to_string(),
        value: took.as_secs_f64(),
        threshold: limit.as_secs_f64(),
        pass: took <= limit,
    }
}

#[test]
fn criterion_1_exact_law_self_consistency() {
    let start = Instant::now();
    let mut checks = run(Scenario::ExactLaws);
    checks.push(timing(
        Scenario::ExactLaws,
        "runtime_secs",
        start.elapsed(),
        Duration::from_secs(1),
    ));
    report(1, &checks);
}

#[test]
fn criterion_2_kth_max_joint_law() {
    report(2, &run(Scenario::KthMax));
}

#[test]
fn criterion_3_exceedance_count_law() {
    report(3, &run(Scenario::Counts));
}

#[test]
fn criterion_4_thinning_construction() {
    report(4, &run(Scenario::Thinning));
}

#[test]
fn criterion_5_top_k_joint_law() {
    report(5, &run(Scenario::TopK));
}

#[test]
fn criterion_6_asymptotic_independence() {
    report(6, &run(Scenario::Independence));
}

#[test]
fn criterion_7_almost_sure_limit() {
    let mut checks = run(Scenario::Aslt);
    let single = AsltConfig {
        dist: BaseDistribution::exponential(1.0)
            .unwrap()
            .standardize()
            .unwrap(),
        n_max: 1_000_000,
        k: 2,
        cells: vec![
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
        ],
        seed: evsum::DEFAULT_SEED,
        stream: 0,
    };
    let start = Instant::now();
    aslt_run(&single).unwrap();
    checks.push(timing(
        Scenario::Aslt,
        "single_path_runtime_secs",
        start.elapsed(),
        Duration::from_secs(120),
    ));
    report(7, &checks);
}

#[test]
fn criterion_8_norming_validation() {
    report(8, &run(Scenario::Norming));
}

fn evsum(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_evsum"))
        .args(args)
        .current_dir(dir)
        .env_remove("EVSUM_SEED")
        .output()
        .expect("binary runs")
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn criterion_9_determinism() {
    let mut checks = run(Scenario::Determinism);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let joint = [
        "simulate", "joint", "--dist", "exp", "--n", "2000", "--R", "3000", "--k", "2", "--seed",
        "7",
    ];
    let aslt = [
        "aslt", "--dist", "exp", "--N", "200000", "--k", "2", "--seed", "7",
    ];
    let pp = [
        "simulate", "pp", "--R", "2000", "--region", "0:0.5", "--region", "0.5:1",
    ];
    let mut mismatches = 0;
    for (name, base) in [("joint", &joint[..]), ("aslt", &aslt[..]), ("pp", &pp[..])] {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let out = d.join(format!("{name}-{threads}.csv"));
            let mut args = base.to_vec();
            args.extend(["--threads", threads, "--out", out.to_str().unwrap()]);
            let status = evsum(&args, d);
            assert!(
                status.status.success(),
                "{name}: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            outputs.push(out);
        }
        let replayed = d.join(format!("{name}-replay.csv"));
        let manifest = d.join(format!("{name}-1.csv.manifest.json"));
        let status = evsum(
            &[
                "replay",
                manifest.to_str().unwrap(),
                "--threads",
                "2",
                "--out",
                replayed.to_str().unwrap(),
            ],
            d,
        );
        assert!(
            status.status.success(),
            "replay {name}: {}",
            String::from_utf8_lossy(&status.stderr)
        );
        if !same_bytes(&outputs[0], &outputs[1]) {
            mismatches += 1;
        }
        if !same_bytes(&outputs[0], &replayed) {
            mismatches += 1;
        }
    }
    checks.push(Check {
        scenario: Scenario::Determinism,
        metric: "cli_byte_mismatches".into(),
        value: mismatches as f64,
        threshold: 0.0,
        pass: mismatches == 0,
    });
    report(9, &checks);
}

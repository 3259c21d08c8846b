mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use evsum::aslt::{aslt_run, AsltConfig, Cell};
use evsum::dist::default_x_grid;
use evsum::engine::{
    empirical_count_law, empirical_joint_cdf, run_experiment, ExperimentConfig, DEFAULT_N,
    DEFAULT_REPLICATIONS, DEFAULT_X_POINTS,
};
use evsum::limits::{
    kth_max_joint_cdf, top_k_joint_cdf, two_level_joint_cdf, EvLimit, LevelVector,
};
use evsum::point_process::{simulate_limit_process, IntervalSet};
use evsum::scenarios::{Check, Scenario, Verifier, VerifyConfig};
use evsum::stats::{poisson_pmf, tv_distance};
use evsum::{child_rng, StandardizedDistribution, DEFAULT_SEED};

use output::{real, Manifest, Output};

#[derive(Debug, Parser)]
#[command(
    name = "evsum",
    version,
    about = "Joint limit laws of maxima and sums: exact values, simulation, checks"
)]
struct Cli {
    /// Master seed [env: EVSUM_SEED, default 7]
    #[arg(long, global = true, env = "EVSUM_SEED")]
    seed: Option<u64>,

    /// Worker threads (all cores when omitted); never changes results
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Exact limit probabilities
    #[command(subcommand)]
    Limits(LimitsCommand),
    /// Norming constants and the n(1 - F(u_n(x))) check
    Norming(NormingArgs),
    /// Monte Carlo experiments
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Logarithmic-average estimator along one long path
    Aslt(AsltArgs),
    /// Run a named acceptance scenario (or `all`)
    Verify(VerifyArgs),
    /// Re-run the command recorded in a manifest
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum LimitsCommand {
    /// Evaluate the k-th maximum, top-k or two-level joint law with the sum
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum SimulateCommand {
    /// Joint law of the k-th maximum and the normalized sum
    Joint(JointArgs),
    /// Limiting thinned Poisson process
    Pp(PpArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct EvalArgs {
    /// gumbel | frechet:alpha=A | weibull:alpha=A
    #[arg(long)]
    limit: String,
    /// Order of the maximum (1 = largest)
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Threshold vector for the top-k law, e.g. `1,0`
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "x"
    )]
    xs: Option<Vec<f64>>,
    /// Second order index for the two-level law (needs --x2)
    #[arg(long, requires = "x2")]
    l: Option<u32>,
    #[arg(long, allow_hyphen_values = true, requires = "l")]
    x2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = f64::INFINITY)]
    y: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct NormingArgs {
    /// exp[:rate=R] | uniform | pareto:alpha=A | normal
    #[arg(long, default_value = "exp")]
    dist: String,
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Normalized levels to check (default: 21-point grid)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct OutArgs {
    /// CSV destination (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest destination (default: <out>.manifest.json)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct JointArgs {
    #[arg(long, default_value = "exp")]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long = "R", alias = "replications", default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y_grid: Option<Vec<f64>>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct PpArgs {
    #[arg(long, default_value = "gumbel")]
    limit: String,
    /// Normalized levels, nonincreasing
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0.6931471805599453,0,-0.6931471805599453"
    )]
    x: Vec<f64>,
    #[arg(long = "R", alias = "replications", default_value_t = 1000)]
    replications: u64,
    /// Regions as `a:b` or unions `a:b+c:d`; repeatable
    #[arg(long = "region", default_value = "0:1")]
    regions: Vec<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct AsltArgs {
    #[arg(long, default_value = "exp")]
    dist: String,
    #[arg(long = "N", default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Child stream of the seed that drives the path
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Cells such as `k=2;x=0;y=0` or `top;x=1/0;y=0`; repeatable
    #[arg(long = "cell")]
    cells: Vec<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct VerifyArgs {
    /// Scenario name or alias, or `all`
    scenario: String,
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long = "R", alias = "replications", default_value_t = DEFAULT_REPLICATIONS)]
    replications: usize,
    #[arg(long, default_value_t = 1_000_000)]
    aslt_n: u64,
    #[arg(long, default_value_t = 16)]
    aslt_paths: u64,
    #[arg(long, default_value_t = 100_000)]
    pp_draws: u64,
    #[arg(long, default_value_t = 100_000)]
    norming_n: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Write the CSV here instead of the recorded destination
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure modes mapped to exit codes.
#[derive(Debug)]
enum Failure {
    /// Bad configuration or input: exit 2.
    Config(String),
    /// A check exceeded its threshold: exit 1.
    Threshold,
}

impl From<evsum::Error> for Failure {
    fn from(e: evsum::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match dispatch(&cli.command, seed, cli.threads, None) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Threshold) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(
    command: &Command,
    seed: u64,
    threads: Option<usize>,
    out_override: Option<&PathBuf>,
) -> Outcome {
    let started = Instant::now();
    let run = Run {
        command,
        seed,
        threads,
        started,
    };
    match command {
        Command::Limits(LimitsCommand::Eval(a)) => limits_eval(a),
        Command::Norming(a) => norming(a),
        Command::Simulate(SimulateCommand::Joint(a)) => simulate_joint(&run, a, out_override),
        Command::Simulate(SimulateCommand::Pp(a)) => simulate_pp(&run, a, out_override),
        Command::Aslt(a) => aslt(&run, a, out_override),
        Command::Verify(a) => verify(seed, threads, a),
        Command::Replay(a) => replay(a, threads),
    }
}

struct Run<'a> {
    command: &'a Command,
    seed: u64,
    threads: Option<usize>,
    started: Instant,
}

impl Run<'_> {
    fn finish(&self, output: Output, summary: Value) -> Outcome {
        let manifest = Manifest::new(
            self.command,
            self.seed,
            self.threads,
            self.started.elapsed(),
            summary,
        );
        output.finish(&manifest)?;
        Ok(())
    }
}

fn parse<T: std::str::FromStr<Err = evsum::Error>>(s: &str) -> Result<T, Failure> {
    Ok(s.parse::<T>()?)
}

fn limits_eval(a: &EvalArgs) -> Outcome {
    let limit: EvLimit = parse(&a.limit)?;
    let (kind, value) = match (&a.xs, a.l, a.x, a.x2) {
        (Some(xs), _, _, _) => ("top_k", top_k_joint_cdf(&limit, xs, a.y)?),
        (None, Some(l), Some(x1), Some(x2)) => (
            "two_level",
            two_level_joint_cdf(&limit, a.k, l, x1, x2, a.y)?,
        ),
        (None, None, Some(x), _) => {
            if a.k < 1 {
                return Err(Failure::Config("k must be at least 1".into()));
            }
            ("kth_max", kth_max_joint_cdf(&limit, a.k, x, a.y))
        }
        _ => {
            return Err(Failure::Config(
                "give --x, --xs, or --x with --l and --x2".into(),
            ))
        }
    };
    let report = json!({
        "law": kind,
        "limit": limit.to_string(),
        "k": a.k,
        "l": a.l,
        "x": a.x,
        "xs": a.xs,
        "x2": a.x2,
        "y": json_real(a.y),
        "value": value,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

/// JSON has no infinities; they are written as strings.
fn json_real(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

fn norming(a: &NormingArgs) -> Outcome {
    let dist: StandardizedDistribution = parse(&a.dist)?;
    if a.n < 1 {
        return Err(Failure::Config("n must be at least 1".into()));
    }
    let limit = dist.limit();
    let xs =
        a.x.clone()
            .unwrap_or_else(|| default_x_grid(&limit, DEFAULT_X_POINTS));
    let rows: Vec<Value> = xs
        .iter()
        .map(|&x| {
            let tau = limit.tau(x);
            let got = dist.validate_norming(a.n, x);
            json!({"x": x, "tau": json_real(tau), "n_sf": got, "rel_err": json_real((got - tau).abs() / tau)})
        })
        .collect();
    let report = json!({
        "dist": dist.to_string(),
        "limit": limit.to_string(),
        "mean": dist.shift(),
        "sd": dist.scale(),
        "norming": dist.norming_constants(a.n),
        "checks": rows,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn simulate_joint(run: &Run, a: &JointArgs, out_override: Option<&PathBuf>) -> Outcome {
    let dist: StandardizedDistribution = parse(&a.dist)?;
    let mut config = ExperimentConfig::standard(dist, a.n, a.replications, run.seed);
    config.k = a.k;
    if let Some(g) = &a.x_grid {
        config.x_grid = g.clone();
    }
    if let Some(g) = &a.y_grid {
        config.y_grid = g.clone();
    }
    let data = run_experiment(&config, run.threads)?;
    let limit = config.dist.limit();
    let emp = empirical_joint_cdf(&data, a.k, &config.x_grid, &config.y_grid)?;

    let mut out = Output::open(&a.out, out_override)?;
    out.header(&["x", "y", "empirical", "exact", "gap"])?;
    let mut sup: f64 = 0.0;
    for (p, &x) in config.x_grid.iter().enumerate() {
        for (q, &y) in config.y_grid.iter().enumerate() {
            let exact = kth_max_joint_cdf(&limit, a.k as u32, x, y);
            let gap = (emp.get(p, q) - exact).abs();
            sup = sup.max(gap);
            out.row(&[
                real(x),
                real(y),
                real(emp.get(p, q)),
                real(exact),
                real(gap),
            ])?;
        }
    }
    // standard levels sit at intensities (0.5, 1, 2); index 1 is tau = 1
    let hist = empirical_count_law(&data, 1, 0)?;
    let tv = tv_distance(&hist.probabilities(), |c| poisson_pmf(1.0, c));
    run.finish(
        out,
        json!({"sup_gap": sup, "tv": tv, "seed": run.seed, "dist": config.dist.to_string()}),
    )
}

fn simulate_pp(run: &Run, a: &PpArgs, out_override: Option<&PathBuf>) -> Outcome {
    let limit: EvLimit = parse(&a.limit)?;
    let levels = LevelVector::new(&limit, &a.x)?;
    let regions: Vec<IntervalSet> = a
        .regions
        .iter()
        .map(|r| parse(r))
        .collect::<Result<_, _>>()?;
    let mut out = Output::open(&a.out, out_override)?;
    out.header(&["replication", "level", "region", "count"])?;
    let mut means = vec![0.0; levels.len()];
    for i in 0..a.replications {
        let pattern = simulate_limit_process(&levels, &mut child_rng(run.seed, i))?;
        for j in 1..=levels.len() {
            let counts = pattern.count_on(j, &regions)?;
            means[j - 1] += counts[0] as f64 / a.replications as f64;
            for (region, c) in regions.iter().zip(counts) {
                out.row(&[
                    i.to_string(),
                    j.to_string(),
                    region.to_string(),
                    c.to_string(),
                ])?;
            }
        }
    }
    run.finish(
        out,
        json!({"taus": levels.taus(), "mean_count_first_region": means, "seed": run.seed}),
    )
}

fn aslt(run: &Run, a: &AsltArgs, out_override: Option<&PathBuf>) -> Outcome {
    let dist: StandardizedDistribution = parse(&a.dist)?;
    let cells: Vec<Cell> = if a.cells.is_empty() {
        let k = a.k;
        let mut cells: Vec<Cell> = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
            .into_iter()
            .map(|(x, y)| Cell::Kth { order: k, x, y })
            .collect();
        if k >= 2 {
            let mut xs = vec![f64::INFINITY; k];
            xs[0] = 1.0;
            xs[1] = 0.0;
            cells.push(Cell::TopK { xs, y: 0.0 });
        }
        cells
    } else {
        a.cells.iter().map(|c| parse(c)).collect::<Result<_, _>>()?
    };
    let config = AsltConfig {
        dist,
        n_max: a.n_max,
        k: a.k,
        cells: cells.clone(),
        seed: run.seed,
        stream: a.stream,
    };
    let trace = aslt_run(&config)?;
    let mut out = Output::open(&a.out, out_override)?;
    out.header(&["N", "cell", "estimate", "exact", "gap"])?;
    for row in &trace {
        out.row(&[
            row.n.to_string(),
            cells[row.cell].to_string(),
            real(row.estimate),
            real(row.exact),
            real(row.gap),
        ])?;
    }
    let last = trace.last().map(|r| r.n).unwrap_or(0);
    let final_gaps: Vec<f64> = trace
        .iter()
        .filter(|r| r.n == last)
        .map(|r| r.gap)
        .collect();
    run.finish(
        out,
        json!({"N": last, "final_gaps": final_gaps, "seed": run.seed, "stream": a.stream}),
    )
}

fn verify(seed: u64, threads: Option<usize>, a: &VerifyArgs) -> Outcome {
    let scenarios: Vec<Scenario> = if a.scenario.eq_ignore_ascii_case("all") {
        Scenario::ALL.to_vec()
    } else {
        vec![parse(&a.scenario)?]
    };
    let mut verifier = Verifier::new(VerifyConfig {
        n: a.n,
        replications: a.replications,
        seed,
        threads,
        aslt_n: a.aslt_n,
        aslt_paths: a.aslt_paths,
        pp_draws: a.pp_draws,
        norming_n: a.norming_n,
    });
    let mut checks: Vec<Check> = Vec::new();
    for sc in scenarios {
        let started = Instant::now();
        let got = verifier.run(sc)?;
        for c in &got {
            eprintln!("{c}");
        }
        eprintln!("{sc}: {:.1}s", started.elapsed().as_secs_f64());
        checks.extend(got);
    }
    let pass = checks.iter().all(|c| c.pass);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({"pass": pass, "seed": seed, "checks": checks}))?
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::Threshold)
    }
}

fn replay(a: &ReplayArgs, threads: Option<usize>) -> Outcome {
    let text = std::fs::read_to_string(&a.manifest)?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    let command: Command = serde_json::from_value(manifest.command)?;
    if matches!(command, Command::Replay(_)) {
        return Err(Failure::Config("a manifest cannot record a replay".into()));
    }
    dispatch(
        &command,
        manifest.seed,
        threads.or(manifest.threads),
        a.out.as_ref(),
    )
}

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use netrand::beta::{fit_mle, MleError};
use netrand::enumerate::{enumerate_graphs, EnumerationError};
use netrand::game::{run_sweep, SweepConfig};
use netrand::graph::{parse_edge_list, DegreeSequence, EdgeList};
use netrand::inference::{estimate_cardinality, run_test, TestError, MLE_MAX_ITER, MLE_TOLERANCE};
use netrand::sampler::{sample_batch, SampleError};
use netrand::stats::{transitivity_index, triangle_count, two_star_count, ExternalityKind, StatisticId};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NOT_GRAPHICAL: u8 = 4;
const EXIT_MLE: u8 = 5;

#[derive(Parser)]
#[command(name = "netrand", version, about = "Conditional randomization tests on graphs with a fixed degree sequence")]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a statistic of an observed network against its degree-conditioned null.
    Test(TestArgs),
    /// Draw graphs with a degree sequence and log their importance weights.
    Sample(SampleArgs),
    /// Count every graph with a (small) degree sequence.
    Enumerate(EnumerateArgs),
    /// Fit the β-model to an observed network.
    Mle(MleArgs),
    /// Simulate pairwise stable networks over a grid of externality strengths.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    statistic: String,
    #[arg(long, default_value_t = 5000)]
    draws: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON report (default: standard output only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    degrees: Option<String>,
    /// Take the degree sequence of this edge list.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Per-draw CSV log.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    degrees: String,
    #[arg(long, default_value_t = netrand::enumerate::DEFAULT_NODE_CAP)]
    cap: usize,
}

#[derive(Args)]
struct MleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    gamma_grid: Vec<f64>,
    #[arg(long, default_value = "transitivity")]
    kind: String,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    a_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    a_sd: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl ToString) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_FAILURE, e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(EXIT_FAILURE, e)
    }
}

impl From<SampleError> for Failure {
    fn from(e: SampleError) -> Self {
        let code = match e {
            SampleError::NotGraphical { .. } => EXIT_NOT_GRAPHICAL,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e)
    }
}

impl From<MleError> for Failure {
    fn from(e: MleError) -> Self {
        Failure::new(EXIT_MLE, format!("β-model fit failed: {e}"))
    }
}

impl From<TestError> for Failure {
    fn from(e: TestError) -> Self {
        match e {
            TestError::Sample(s) => s.into(),
            TestError::Mle(_) => Failure::new(EXIT_MLE, e),
            TestError::BadAlpha(_) | TestError::NoDraws => Failure::new(EXIT_USAGE, e),
            TestError::Statistic(_) => Failure::new(EXIT_FAILURE, e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    }
    let result = match cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Enumerate(args) => cmd_enumerate(args),
        Command::Mle(args) => cmd_mle(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn read_edge_list(path: &Path) -> Result<EdgeList, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    let parsed = parse_edge_list(&text).map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
    if parsed.duplicate_edges > 0 {
        eprintln!("note: collapsed {} duplicate edges", parsed.duplicate_edges);
    }
    Ok(parsed)
}

fn parse_degrees(text: &str) -> Result<DegreeSequence, Failure> {
    text.parse::<DegreeSequence>()
        .map_err(|e| Failure::new(EXIT_PARSE, format!("bad degree sequence {text:?}: {e}")))
}

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    let statistic: StatisticId = args.statistic.parse().map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let observed = read_edge_list(&args.input)?;
    let seed = seed_or_random(args.seed);
    let report = run_test(&observed.graph, statistic, args.draws, args.alpha, seed)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &args.out {
        Some(path) => {
            let mut f = create(path)?;
            writeln!(f, "{json}")?;
        }
        None => println!("{json}"),
    }
    println!(
        "{} observed={} p_geq={:.6} p_gt={:.6} ess={:.1}",
        report.statistic, report.observed, report.p_value_geq, report.p_value_gt, report.ess
    );
    Ok(())
}

#[derive(Serialize)]
struct DrawRow {
    b: usize,
    log_c: f64,
    log_sigma: f64,
    log_weight: f64,
    triangle_count: u64,
    two_star_count: u64,
    transitivity_index: f64,
}

fn cmd_sample(args: SampleArgs) -> Result<(), Failure> {
    let d = match (&args.degrees, &args.input) {
        (Some(text), _) => parse_degrees(text)?,
        (None, Some(path)) => read_edge_list(path)?.graph.degree_sequence(),
        (None, None) => unreachable!("clap requires one of --degrees and --input"),
    };
    let seed = seed_or_random(args.seed);
    let draws = sample_batch(&d, args.draws, seed)?;
    let estimate = estimate_cardinality(&draws).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    if let Some(path) = &args.out {
        let mut w = csv::Writer::from_writer(create(path)?);
        for (k, draw) in draws.iter().enumerate() {
            w.serialize(DrawRow {
                b: k + 1,
                log_c: draw.log_c,
                log_sigma: draw.log_sigma,
                log_weight: draw.log_weight(),
                triangle_count: triangle_count(&draw.graph),
                two_star_count: two_star_count(&draw.graph),
                transitivity_index: transitivity_index(&draw.graph).value,
            })?;
        }
        w.flush()?;
    }
    println!(
        "log_cardinality={:.6} cardinality={:.6e} draws={} seed={seed}",
        estimate.log_value,
        estimate.value(),
        draws.len()
    );
    Ok(())
}

fn cmd_enumerate(args: EnumerateArgs) -> Result<(), Failure> {
    let d = parse_degrees(&args.degrees)?;
    let class = enumerate_graphs(&d, args.cap).map_err(|e| match e {
        EnumerationError::TooLarge { .. } => Failure::new(EXIT_USAGE, e),
        EnumerationError::EmptyClass(_) => Failure::new(EXIT_NOT_GRAPHICAL, e),
    })?;
    println!("{} graphs", class.len());
    Ok(())
}

#[derive(Serialize)]
struct MleRow<'a> {
    label: &'a str,
    a_tilde: f64,
    expected_degree: f64,
    degree: usize,
}

fn cmd_mle(args: MleArgs) -> Result<(), Failure> {
    let observed = read_edge_list(&args.input)?;
    let d = observed.graph.degree_sequence();
    let fit = fit_mle(&d, MLE_TOLERANCE, MLE_MAX_ITER)?;
    let expected = fit.a.expected_degrees();
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for (k, label) in observed.labels.iter().enumerate() {
        w.serialize(MleRow {
            label,
            a_tilde: fit.a.as_slice()[k],
            expected_degree: expected[k],
            degree: d[k],
        })?;
    }
    w.flush()?;
    eprintln!("converged in {} iterations, max residual {:.3e}", fit.iterations, fit.max_residual);
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    let kind: ExternalityKind = args.kind.parse().map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let seed = seed_or_random(args.seed);
    let cfg = SweepConfig {
        n: args.n,
        gamma_grid: args.gamma_grid,
        kind,
        replications: args.reps,
        seed,
        a_mean: args.a_mean,
        a_sd: args.a_sd,
    };
    let rows = run_sweep(&cfg).map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

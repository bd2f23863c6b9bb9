use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use graph_ot::io;
use graph_ot::scenario::{run_scenario, DensitySource, ExitStatus, GraphSource, Scenario, ScenarioSpec};
use graph_ot::{Error, JacobianMode, MobilityModel, SolveConfig};

/// Discrete Wasserstein geodesics on weighted graphs.
#[derive(Parser, Debug)]
#[command(name = "graph-ot", version)]
#[command(group(ArgGroup::new("graph_source").args(["graph", "lattice1d", "lattice2d", "dumbbell", "complete"])))]
#[command(group(ArgGroup::new("mu_source").args(["mu", "mu_gauss1d", "mu_gauss2d", "mu_random", "mu_uniform"])))]
#[command(group(ArgGroup::new("nu_source").args(["nu", "nu_gauss1d", "nu_gauss2d", "nu_random", "nu_uniform"])))]
struct Cli {
    /// solve, benchmark-1d, benchmark-2d, map-benchmark, tree-compare,
    /// dumbbell, recover-topology, consensus or check-cfl
    scenario: Scenario,

    /// Edge-list file (`i,j,omega` header)
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Periodic 1D lattice: N LEN
    #[arg(long, num_args = 2, value_names = ["N", "LEN"])]
    lattice1d: Option<Vec<f64>>,
    /// Periodic square lattice: N LEN (N x N nodes)
    #[arg(long, num_args = 2, value_names = ["N", "LEN"])]
    lattice2d: Option<Vec<f64>>,
    /// Left end of the lattice domain
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    origin: f64,
    /// Two cliques joined by one bridge: L R
    #[arg(long, num_args = 2, value_names = ["L", "R"])]
    dumbbell: Option<Vec<usize>>,
    /// Complete graph on N nodes
    #[arg(long, value_name = "N")]
    complete: Option<usize>,

    /// Initial density file (one value per line)
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long, num_args = 3, value_names = ["A", "B", "R"], allow_negative_numbers = true)]
    mu_gauss1d: Option<Vec<f64>>,
    #[arg(long, num_args = 6, value_names = ["A", "B", "C", "D", "W", "EPS"], allow_negative_numbers = true)]
    mu_gauss2d: Option<Vec<f64>>,
    #[arg(long, value_name = "SEED")]
    mu_random: Option<u64>,
    #[arg(long)]
    mu_uniform: bool,

    /// Terminal density file (one value per line)
    #[arg(long)]
    nu: Option<PathBuf>,
    #[arg(long, num_args = 3, value_names = ["A", "B", "R"], allow_negative_numbers = true)]
    nu_gauss1d: Option<Vec<f64>>,
    #[arg(long, num_args = 6, value_names = ["A", "B", "C", "D", "W", "EPS"], allow_negative_numbers = true)]
    nu_gauss2d: Option<Vec<f64>>,
    #[arg(long, value_name = "SEED")]
    nu_random: Option<u64>,
    #[arg(long)]
    nu_uniform: bool,

    /// Rescale density files to unit mass
    #[arg(long)]
    normalize: bool,
    /// Number of time steps M
    #[arg(long)]
    steps: Option<usize>,
    /// mean or upwind
    #[arg(long)]
    theta: Option<MobilityModel>,
    /// analytic, fd or chord
    #[arg(long, default_value = "analytic")]
    jacobian: JacobianMode,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Halve Newton steps until the residual decreases
    #[arg(long)]
    damping: bool,
    /// Spanning tree edge list; repeat for tree-compare
    #[arg(long)]
    tree: Vec<PathBuf>,
    /// Flux threshold for recover-topology
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path; the document goes to stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn lattice_points(values: &[f64]) -> Result<usize, Error> {
    let n = values[0];
    if n.fract() != 0.0 || n < 1.0 {
        return Err(Error::InvalidConfig(format!("lattice size must be a positive integer, got {n}")));
    }
    Ok(n as usize)
}

fn density(
    file: Option<PathBuf>,
    g1: Option<Vec<f64>>,
    g2: Option<Vec<f64>>,
    random: Option<u64>,
    uniform: bool,
) -> Option<DensitySource> {
    if let Some(path) = file {
        Some(DensitySource::File { path })
    } else if let Some(p) = g1 {
        Some(DensitySource::Gauss1d { a: p[0], b: p[1], r: p[2] })
    } else if let Some(p) = g2 {
        Some(DensitySource::Gauss2d { a: p[0], b: p[1], c: p[2], d: p[3], w: p[4], eps: p[5] })
    } else if let Some(seed) = random {
        Some(DensitySource::Random { seed })
    } else {
        uniform.then_some(DensitySource::Uniform)
    }
}

fn spec_from(cli: Cli) -> Result<ScenarioSpec, Error> {
    let mut spec = ScenarioSpec::new(cli.scenario);
    spec.graph = if let Some(path) = cli.graph {
        Some(GraphSource::File { path })
    } else if let Some(v) = cli.lattice1d {
        Some(GraphSource::Lattice1d { points: lattice_points(&v)?, length: v[1], origin: cli.origin })
    } else if let Some(v) = cli.lattice2d {
        Some(GraphSource::Lattice2d { side: lattice_points(&v)?, length: v[1], origin: cli.origin })
    } else if let Some(v) = cli.dumbbell {
        Some(GraphSource::Dumbbell { left: v[0], right: v[1] })
    } else {
        cli.complete.map(|nodes| GraphSource::Complete { nodes })
    };
    spec.mu = density(cli.mu, cli.mu_gauss1d, cli.mu_gauss2d, cli.mu_random, cli.mu_uniform);
    spec.nu = density(cli.nu, cli.nu_gauss1d, cli.nu_gauss2d, cli.nu_random, cli.nu_uniform);
    spec.normalize = cli.normalize;
    spec.steps = cli.steps;
    spec.mobility = cli.theta;
    spec.solver = SolveConfig {
        tolerance: cli.tol,
        max_iterations: cli.max_iter,
        jacobian_mode: cli.jacobian,
        damping: cli.damping,
        ..SolveConfig::default()
    };
    spec.trees = cli.tree;
    spec.threshold = cli.threshold;
    spec.seed = cli.seed;
    spec.output = cli.out;
    Ok(spec)
}

fn fail(error: &Error) -> ExitCode {
    let status = ExitStatus::for_error(error);
    let body = serde_json::json!({
        "error": error.kind(),
        "message": error.to_string(),
        "exit_code": status.code(),
    });
    eprintln!("{body}");
    ExitCode::from(status.code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAPH_OT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::InvalidConfig(e.to_string().trim().to_string())),
    };
    let spec = match spec_from(cli) {
        Ok(spec) => spec,
        Err(e) => return fail(&e),
    };
    let outcome = match run_scenario(&spec) {
        Ok(outcome) => outcome,
        Err(e) => return fail(&e),
    };
    match &spec.output {
        Some(path) => {
            let solve = outcome.document.solve.as_ref();
            println!(
                "{}: converged={} iterations={} w2={:.6e} -> {}",
                spec.scenario,
                solve.is_some_and(|s| s.converged),
                solve.map_or(0, |s| s.iterations),
                solve.map_or(f64::NAN, |s| s.w2),
                path.display()
            );
        }
        None => match io::to_json(&outcome.document) {
            Ok(text) => {
                // a closed pipe on stdout is not a solver failure
                let _ = writeln!(std::io::stdout().lock(), "{text}");
            }
            Err(e) => return fail(&e),
        },
    }
    if outcome.status != ExitStatus::Success {
        eprintln!(
            "{}",
            serde_json::json!({ "error": format!("{:?}", outcome.status), "exit_code": outcome.status.code() })
        );
    }
    ExitCode::from(outcome.status.code() as u8)
}

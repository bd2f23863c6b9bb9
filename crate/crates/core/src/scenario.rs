//! End-to-end experiment runner behind the `graph-ot` binary.
//!
//! Each scenario resolves a graph, endpoint densities and solver settings
//! (filling in scenario defaults), runs one or more solves and returns a
//! [`RunDocument`] together with an exit status.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::densities::{
    benchmark_1d_map_densities, gaussian_density_1d, gaussian_density_2d, seeded_random_connected_graph,
    seeded_random_density, Gaussian2d,
};
use crate::error::{Error, Result};
use crate::graph::{complete_graph, cycle_with_chord, dumbbell, Lattice1d, Lattice2d, WeightedGraph};
use crate::io::{self, GraphSummary, RunDocument, SolveSummary, SCHEMA_VERSION};
use crate::metrics::{self, NodalVelocity};
use crate::mobility::MobilityModel;
use crate::newton::{check_cfl, default_initial_guess, newton_solve, SolveConfig, SolveReport};
use crate::system::TransportProblem;
use crate::tree::SpanningTree;

/// Mass defect above which a trajectory counts as an invariant violation.
pub const MASS_DEFECT_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Solve,
    Benchmark1d,
    Benchmark2d,
    MapBenchmark,
    TreeCompare,
    Dumbbell,
    RecoverTopology,
    Consensus,
    CheckCfl,
}

impl Scenario {
    pub const ALL: [Scenario; 9] = [
        Scenario::Solve,
        Scenario::Benchmark1d,
        Scenario::Benchmark2d,
        Scenario::MapBenchmark,
        Scenario::TreeCompare,
        Scenario::Dumbbell,
        Scenario::RecoverTopology,
        Scenario::Consensus,
        Scenario::CheckCfl,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Solve => "solve",
            Scenario::Benchmark1d => "benchmark-1d",
            Scenario::Benchmark2d => "benchmark-2d",
            Scenario::MapBenchmark => "map-benchmark",
            Scenario::TreeCompare => "tree-compare",
            Scenario::Dumbbell => "dumbbell",
            Scenario::RecoverTopology => "recover-topology",
            Scenario::Consensus => "consensus",
            Scenario::CheckCfl => "check-cfl",
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
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum GraphSource {
    File { path: PathBuf },
    /// Periodic lattice on `[origin, origin + length)`.
    Lattice1d { points: usize, length: f64, origin: f64 },
    /// Periodic square lattice on `[origin, origin + length)^2`.
    Lattice2d { side: usize, length: f64, origin: f64 },
    Dumbbell { left: usize, right: usize },
    Complete { nodes: usize },
    /// The 5-node cycle with the chord (1,3).
    CycleWithChord,
    /// Seeded random connected graph with unit weights.
    Random { nodes: usize, edge_probability: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DensitySource {
    File { path: PathBuf },
    Gauss1d { a: f64, b: f64, r: f64 },
    Gauss2d { a: f64, b: f64, c: f64, d: f64, w: f64, eps: f64 },
    Random { seed: u64 },
    Uniform,
    /// `1 + sin(2 pi x)/32` on a 1D lattice.
    Sine,
}

/// Everything needed to run one scenario. `None` fields take the
/// scenario's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub graph: Option<GraphSource>,
    pub mu: Option<DensitySource>,
    pub nu: Option<DensitySource>,
    /// Rescale density files to unit mass.
    pub normalize: bool,
    pub steps: Option<usize>,
    pub mobility: Option<MobilityModel>,
    pub solver: SolveConfig,
    /// Explicit spanning trees (edge-list files). The first is used for
    /// single solves; tree-compare uses all of them.
    pub trees: Vec<PathBuf>,
    pub threshold: Option<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl ScenarioSpec {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            graph: None,
            mu: None,
            nu: None,
            normalize: false,
            steps: None,
            mobility: None,
            solver: SolveConfig::default(),
            trees: Vec::new(),
            threshold: None,
            seed: 0,
            output: None,
        }
    }
}

/// Process exit status of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitStatus {
    Success,
    InputError,
    NotConverged,
    InvariantViolation,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        match self {
            ExitStatus::Success => 0,
            ExitStatus::InputError => 2,
            ExitStatus::NotConverged => 3,
            ExitStatus::InvariantViolation => 4,
        }
    }

    /// Status for an error raised before or during a run.
    pub fn for_error(error: &Error) -> Self {
        match error {
            Error::SingularJacobian { .. } | Error::MaxIterationsExceeded { .. } | Error::NonFiniteResidual(_) => {
                ExitStatus::NotConverged
            }
            _ => ExitStatus::InputError,
        }
    }

    fn worst(self, other: Self) -> Self {
        let rank = |s: Self| match s {
            ExitStatus::Success => 0,
            ExitStatus::InvariantViolation => 1,
            ExitStatus::NotConverged => 2,
            ExitStatus::InputError => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

pub struct ScenarioOutcome {
    pub document: RunDocument,
    pub status: ExitStatus,
}

/// Graph resolved from a [`GraphSource`], keeping lattice geometry.
#[derive(Debug, Clone)]
pub enum Domain {
    Plain(WeightedGraph),
    Line(Lattice1d),
    Grid(Lattice2d),
}

impl Domain {
    pub fn graph(&self) -> &WeightedGraph {
        match self {
            Domain::Plain(g) => g,
            Domain::Line(l) => &l.graph,
            Domain::Grid(l) => &l.graph,
        }
    }
}

pub fn build_domain(source: &GraphSource) -> Result<Domain> {
    Ok(match source {
        GraphSource::File { path } => Domain::Plain(io::read_graph(path)?),
        GraphSource::Lattice1d { points, length, origin } => {
            Domain::Line(Lattice1d::new(*points, *origin, origin + length)?)
        }
        GraphSource::Lattice2d { side, length, origin } => {
            Domain::Grid(Lattice2d::new(*side, *origin, origin + length)?)
        }
        GraphSource::Dumbbell { left, right } => Domain::Plain(dumbbell(*left, *right)?),
        GraphSource::Complete { nodes } => Domain::Plain(complete_graph(*nodes)?),
        GraphSource::CycleWithChord => Domain::Plain(cycle_with_chord()),
        GraphSource::Random { nodes, edge_probability, seed } => {
            Domain::Plain(seeded_random_connected_graph(*nodes, *edge_probability, *seed)?)
        }
    })
}

pub fn build_density(source: &DensitySource, domain: &Domain, normalize: bool) -> Result<Vec<f64>> {
    let n = domain.graph().node_count();
    let rho = match (source, domain) {
        (DensitySource::File { path }, _) => io::read_density(path, normalize)?,
        (DensitySource::Gauss1d { a, b, r }, Domain::Line(l)) => gaussian_density_1d(l, *a, *b, *r)?,
        (DensitySource::Gauss1d { .. }, _) => return Err(Error::NotA1DLattice),
        (DensitySource::Gauss2d { a, b, c, d, w, eps }, Domain::Grid(l)) => gaussian_density_2d(
            l,
            Gaussian2d { a: *a, b: *b, c: *c, d: *d, w: *w, eps: *eps },
        )?,
        (DensitySource::Gauss2d { .. }, _) => return Err(Error::NotA2DLattice),
        (DensitySource::Random { seed }, _) => seeded_random_density(n, *seed)?,
        (DensitySource::Uniform, _) => vec![1.0 / n as f64; n],
        (DensitySource::Sine, Domain::Line(l)) => benchmark_1d_map_densities(l)?.0,
        (DensitySource::Sine, _) => return Err(Error::NotA1DLattice),
    };
    if rho.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho.len() });
    }
    Ok(rho)
}

/// Scenario defaults, applied to unset fields.
fn resolve(spec: &ScenarioSpec) -> ScenarioSpec {
    let mut s = spec.clone();
    let seed = spec.seed;
    let (graph, mu, nu, steps, mobility) = match spec.scenario {
        Scenario::Solve | Scenario::CheckCfl => (None, None, None, 32, MobilityModel::ArithmeticMean),
        Scenario::Benchmark1d => (
            Some(GraphSource::Lattice1d { points: 64, length: 4.0, origin: -1.0 }),
            Some(DensitySource::Gauss1d { a: 15.0, b: 1.4, r: 1e-4 }),
            Some(DensitySource::Gauss1d { a: 15.0, b: 1.7, r: 1e-4 }),
            32,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::Benchmark2d => (
            Some(GraphSource::Lattice2d { side: 16, length: 4.0, origin: -1.0 }),
            Some(DensitySource::Gauss2d { a: 10.0, b: 0.5, c: 10.0, d: 1.5, w: 1.0, eps: 1e-4 }),
            Some(DensitySource::Gauss2d { a: 10.0, b: 1.5, c: 10.0, d: 1.3, w: 1.0, eps: 1e-4 }),
            32,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::MapBenchmark => (
            Some(GraphSource::Lattice1d { points: 128, length: 1.0, origin: 0.0 }),
            Some(DensitySource::Sine),
            Some(DensitySource::Uniform),
            64,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::TreeCompare => (
            Some(GraphSource::CycleWithChord),
            Some(DensitySource::Random { seed }),
            Some(DensitySource::Random { seed: seed.wrapping_add(1) }),
            64,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::Dumbbell => (
            Some(GraphSource::Dumbbell { left: 4, right: 4 }),
            Some(DensitySource::Random { seed }),
            Some(DensitySource::Random { seed: seed.wrapping_add(1) }),
            128,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::RecoverTopology => (
            Some(GraphSource::Complete { nodes: 10 }),
            Some(DensitySource::Random { seed }),
            Some(DensitySource::Random { seed: seed.wrapping_add(1) }),
            32,
            MobilityModel::ArithmeticMean,
        ),
        Scenario::Consensus => (
            Some(GraphSource::Random { nodes: 10, edge_probability: 0.3, seed }),
            Some(DensitySource::Random { seed }),
            Some(DensitySource::Uniform),
            256,
            MobilityModel::ArithmeticMean,
        ),
    };
    s.graph = s.graph.or(graph);
    s.mu = s.mu.or(mu);
    s.nu = s.nu.or(nu);
    s.steps = s.steps.or(Some(steps));
    s.mobility = s.mobility.or(Some(mobility));
    if s.scenario == Scenario::RecoverTopology {
        s.threshold = s.threshold.or(Some(1e-3));
    }
    s
}

/// One solved problem with its timing.
struct Solved {
    problem: TransportProblem,
    report: SolveReport,
    seconds: f64,
}

fn solve(problem: TransportProblem, config: &SolveConfig) -> Result<Solved> {
    let start = Instant::now();
    let report = newton_solve(&problem, &default_initial_guess(&problem), config)?;
    let seconds = start.elapsed().as_secs_f64();
    info!(
        "solve: converged={} iterations={} |F|={:e} in {seconds:.3}s",
        report.converged,
        report.iterations,
        report.final_residual()
    );
    Ok(Solved { problem, report, seconds })
}

fn summary(solved: &Solved) -> SolveSummary {
    let r = &solved.report;
    let p = &solved.problem;
    SolveSummary {
        converged: r.converged,
        iterations: r.iterations,
        residual_history: r.residual_history.clone(),
        positivity_ok: r.positivity_ok,
        cfl_margin: r.cfl_margin,
        w2_action: r.w2_action,
        w2_initial: r.w2_initial,
        w2: r.w2_action.sqrt(),
        min_rcond: r.min_rcond,
        hamiltonian_drift: metrics::hamiltonian_drift(&r.trajectory, p.graph(), p.model()),
        max_mass_defect: r.trajectory.max_mass_defect(),
        wall_time_seconds: solved.seconds,
    }
}

fn graph_summary(problem: &TransportProblem) -> GraphSummary {
    let g = problem.graph();
    GraphSummary {
        nodes: g.node_count(),
        edges: g.edge_count(),
        edge_list: g.to_edge_list(),
        tree: problem.tree().node_pairs(),
    }
}

fn status_of(report: &SolveReport) -> ExitStatus {
    if !report.converged {
        ExitStatus::NotConverged
    } else if !report.positivity_ok || report.trajectory.max_mass_defect() > MASS_DEFECT_LIMIT {
        ExitStatus::InvariantViolation
    } else {
        ExitStatus::Success
    }
}

fn load_tree(path: &PathBuf, graph: &WeightedGraph) -> Result<SpanningTree> {
    let pairs = io::parse_tree_pairs(&std::fs::read_to_string(path)?)?;
    SpanningTree::from_node_pairs(graph, &pairs)
}

fn required<'a, T>(value: &'a Option<T>, what: &str, scenario: Scenario) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("scenario '{scenario}' needs {what}")))
}

/// Runs a scenario and writes the document to `spec.output` when set.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioOutcome> {
    spec.solver.validate()?;
    let spec = resolve(spec);
    let domain = build_domain(required(&spec.graph, "a graph source", spec.scenario)?)?;
    let graph = domain.graph().clone();
    let mu = build_density(required(&spec.mu, "an initial density", spec.scenario)?, &domain, spec.normalize)?;
    let nu = build_density(required(&spec.nu, "a terminal density", spec.scenario)?, &domain, spec.normalize)?;
    let steps = spec.steps.expect("resolved");
    let model = spec.mobility.expect("resolved");
    let tree = match spec.trees.first() {
        Some(path) if spec.scenario != Scenario::TreeCompare => load_tree(path, &graph)?,
        _ => SpanningTree::kruskal(&graph),
    };
    let problem = TransportProblem::new(graph.clone(), tree, model, mu, nu, steps)?;

    let (main, extras, status) = match spec.scenario {
        Scenario::MapBenchmark => {
            let (rows, status, solved) = map_benchmark(&spec, &domain, &problem)?;
            (solved, json!({ "table": rows }), status)
        }
        Scenario::TreeCompare => tree_compare(&spec, &problem).map(|(v, st, s)| (s, v, st))?,
        _ => {
            let solved = solve(problem, &spec.solver)?;
            let extras = scenario_extras(&spec, &domain, &solved)?;
            let status = status_of(&solved.report);
            (solved, extras, status)
        }
    };

    let document = RunDocument {
        schema_version: SCHEMA_VERSION,
        scenario: spec.scenario.to_string(),
        config: serde_json::to_value(&spec).map_err(|e| Error::Io(e.to_string()))?,
        graph: Some(graph_summary(&main.problem)),
        solve: Some(summary(&main)),
        trajectory: Some(main.report.trajectory.clone()),
        extras,
    };
    if let Some(path) = &spec.output {
        io::write_document(path, &document)?;
    }
    Ok(ScenarioOutcome { document, status })
}

fn scenario_extras(spec: &ScenarioSpec, domain: &Domain, solved: &Solved) -> Result<serde_json::Value> {
    let traj = &solved.report.trajectory;
    let g = solved.problem.graph();
    Ok(match spec.scenario {
        Scenario::Benchmark1d | Scenario::Benchmark2d => {
            let dx = match domain {
                Domain::Line(l) => l.spacing,
                Domain::Grid(l) => l.spacing,
                Domain::Plain(_) => f64::NAN,
            };
            json!({ "table": [{
                "dx": dx,
                "w2": solved.report.w2_action.sqrt(),
                "wall_time_seconds": solved.seconds,
            }]})
        }
        Scenario::Dumbbell => {
            // the bridge joins the last left node to the first right node
            let bridge = match &spec.graph {
                Some(GraphSource::Dumbbell { left, .. }) => g.edge_index(left - 1, *left),
                _ => None,
            };
            let mean_abs: Vec<f64> = (0..g.edge_count())
                .map(|e| {
                    traj.edge_velocities.iter().map(|v| v[e].abs()).sum::<f64>()
                        / traj.edge_velocities.len() as f64
                })
                .collect();
            let overall = mean_abs.iter().sum::<f64>() / mean_abs.len() as f64;
            json!({
                "bridge_edge": bridge.map(|k| (g.edge(k).a + 1, g.edge(k).b + 1)),
                "bridge_mean_abs_velocity": bridge.map(|k| mean_abs[k]),
                "edge_mean_abs_velocity": overall,
                "min_density": traj.min_density(),
            })
        }
        Scenario::RecoverTopology => {
            let threshold = spec.threshold.expect("resolved");
            let levels = (1..=traj.edge_velocities.len())
                .map(|level| metrics::effective_edges(traj, g, level, threshold))
                .collect::<Result<Vec<_>>>()?;
            json!({ "threshold": threshold, "effective_edges": levels })
        }
        Scenario::Consensus => {
            let n = g.node_count() as f64;
            let distance: Vec<f64> = traj
                .densities
                .iter()
                .map(|row| row.iter().map(|r| (r - 1.0 / n).abs()).fold(0.0, f64::max))
                .collect();
            json!({ "max_deviation_from_uniform": distance })
        }
        Scenario::CheckCfl => {
            let tau = solved.problem.tau();
            let mut per_level = Vec::new();
            let mut bound: Option<f64> = None;
            for v in &traj.edge_velocities[..traj.steps()] {
                let (margins, level_bound) = check_cfl(g, v, tau)?;
                if let Some(b) = level_bound {
                    bound = Some(bound.map_or(b, |x| x.min(b)));
                }
                per_level.push(json!({
                    "margins": margins,
                    "tau_star": level_bound,
                }));
            }
            json!({
                "tau": tau,
                "tau_star": bound,
                "min_margin": solved.report.cfl_margin,
                "local_condition_holds": solved.report.cfl_margin >= 0.0,
                "levels": per_level,
            })
        }
        _ => serde_json::Value::Null,
    })
}

fn map_benchmark(
    spec: &ScenarioSpec,
    domain: &Domain,
    problem: &TransportProblem,
) -> Result<(Vec<serde_json::Value>, ExitStatus, Solved)> {
    let Domain::Line(lattice) = domain else {
        return Err(Error::NotA1DLattice);
    };
    let solved = solve(problem.clone(), &spec.solver)?;
    let error = metrics::map_error_1d(
        &solved.report.trajectory,
        lattice,
        metrics::sine_benchmark_map,
        NodalVelocity::Forward,
    )?;
    let row = json!({
        "dx": lattice.spacing,
        "dt": problem.tau(),
        "w2": solved.report.w2_action.sqrt(),
        "map_error": error,
        "wall_time_seconds": solved.seconds,
    });
    Ok((vec![row], status_of(&solved.report), solved))
}

/// The three spanning trees of the 5-node cycle with chord.
pub fn cycle_with_chord_trees() -> [Vec<(usize, usize)>; 3] {
    [
        vec![(1, 2), (2, 3), (3, 4), (4, 5)],
        vec![(2, 3), (3, 4), (4, 5), (1, 5)],
        vec![(2, 3), (1, 3), (1, 5), (4, 5)],
    ]
}

fn tree_compare(spec: &ScenarioSpec, problem: &TransportProblem) -> Result<(serde_json::Value, ExitStatus, Solved)> {
    let g = problem.graph();
    let mut trees = Vec::new();
    if spec.trees.is_empty() {
        if matches!(spec.graph, Some(GraphSource::CycleWithChord)) {
            for pairs in cycle_with_chord_trees() {
                trees.push(SpanningTree::from_node_pairs(g, &pairs)?);
            }
        } else {
            return Err(Error::InvalidConfig(
                "tree-compare on a custom graph needs at least one --tree".into(),
            ));
        }
    } else {
        if spec.trees.len() == 1 {
            trees.push(SpanningTree::kruskal(g));
        }
        for path in &spec.trees {
            trees.push(load_tree(path, g)?);
        }
    }
    let mut runs = Vec::new();
    let mut status = ExitStatus::Success;
    for tree in trees {
        let solved = solve(problem.with_tree(tree)?, &spec.solver)?;
        status = status.worst(status_of(&solved.report));
        runs.push(solved);
    }
    let mut max_estimator_gap: f64 = 0.0;
    let mut max_trajectory_gap: f64 = 0.0;
    for x in &runs {
        for y in &runs {
            max_estimator_gap = max_estimator_gap
                .max((x.report.w2_action - y.report.w2_action).abs())
                .max((x.report.w2_initial - y.report.w2_initial).abs());
            max_trajectory_gap = max_trajectory_gap.max(trajectory_gap(&x.report, &y.report));
        }
    }
    let per_tree: Vec<_> = runs
        .iter()
        .map(|r| {
            json!({
                "tree": r.problem.tree().node_pairs(),
                "a": r.report.w2_action,
                "b": r.report.w2_initial,
                "iterations": r.report.iterations,
            })
        })
        .collect();
    let value = json!({
        "trees": per_tree,
        "max_estimator_gap": max_estimator_gap,
        "max_trajectory_gap": max_trajectory_gap,
        "tau": problem.tau(),
        "tolerance": spec.solver.tolerance,
    });
    Ok((value, status, runs.swap_remove(0)))
}

/// Max-norm distance between the densities and expanded edge velocities of
/// two solves of the same problem.
pub fn trajectory_gap(x: &SolveReport, y: &SolveReport) -> f64 {
    let a = &x.trajectory;
    let b = &y.trajectory;
    a.densities
        .iter()
        .flatten()
        .zip(b.densities.iter().flatten())
        .chain(a.edge_velocities.iter().flatten().zip(b.edge_velocities.iter().flatten()))
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max)
}

#![allow(dead_code)]

use graph_ot::densities::benchmark_1d_map_densities;
use graph_ot::graph::WeightedGraph;
use graph_ot::{default_initial_guess, newton_solve, Lattice1d, MobilityModel, SolveConfig, SolveReport, TransportProblem};

pub const MEAN: MobilityModel = MobilityModel::ArithmeticMean;

pub fn two_node_graph(omega: f64) -> WeightedGraph {
    WeightedGraph::from_edge_list(&[(1, 2, omega)]).unwrap()
}

pub fn solve(problem: &TransportProblem) -> SolveReport {
    newton_solve(problem, &default_initial_guess(problem), &SolveConfig::default()).unwrap()
}

/// Sine-to-uniform run on the unit circle with `n` nodes and `steps` levels.
pub fn map_benchmark(n: usize, steps: usize) -> (Lattice1d, TransportProblem, SolveReport) {
    let lattice = Lattice1d::new(n, 0.0, 1.0).unwrap();
    let (mu, nu) = benchmark_1d_map_densities(&lattice).unwrap();
    let problem = TransportProblem::with_kruskal_tree(lattice.graph.clone(), MEAN, mu, nu, steps).unwrap();
    let report = solve(&problem);
    (lattice, problem, report)
}

/// Max-norm distance between the densities and edge velocities of two runs.
pub fn max_gap(x: &SolveReport, y: &SolveReport) -> f64 {
    let rows = |r: &SolveReport| {
        r.trajectory
            .densities
            .iter()
            .chain(&r.trajectory.edge_velocities)
            .flatten()
            .copied()
            .collect::<Vec<f64>>()
    };
    rows(x).iter().zip(rows(y)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Forward recursion of the 2-node scheme from `(rho_1, v)` at level 0.
/// Mean mobility is `1/2` on the simplex, so the kinetic terms at both
/// nodes coincide and `v` stays constant; upwind takes `rho_1` for `v >= 0`
/// and `rho_2` otherwise, and only the upstream node feels `v^2 / 2`.
pub fn two_node_shoot(model: MobilityModel, omega: f64, rho1: f64, v0: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let tau = 1.0 / steps as f64;
    let s = omega.sqrt();
    let (mut r, mut v) = (rho1, v0);
    let (mut rho, mut vel) = (vec![r], vec![v]);
    for _ in 0..steps {
        let (theta, k1, k2) = match model {
            MobilityModel::ArithmeticMean => (0.5, 0.25 * v * v, 0.25 * v * v),
            MobilityModel::Upwind if v >= 0.0 => (r, 0.5 * v * v, 0.0),
            MobilityModel::Upwind => (1.0 - r, 0.0, 0.5 * v * v),
        };
        let r_next = r - tau * s * v * theta;
        let v_next = v - tau * s * (k2 - k1);
        r = r_next;
        v = v_next;
        rho.push(r);
        vel.push(v);
    }
    (rho, vel)
}

/// Bisection on the level-0 velocity so that the shot lands on `target`.
/// The terminal density is decreasing in `v0` on `[-4, 4]` for the
/// endpoints used here; wider brackets let upwind shots overflow.
pub fn two_node_bisect(model: MobilityModel, omega: f64, rho1: f64, target: f64, steps: usize) -> f64 {
    let (mut lo, mut hi) = (-4.0, 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let end = *two_node_shoot(model, omega, rho1, mid, steps).0.last().unwrap();
        if end > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

//! Geodesic between two densities on the 5-node cycle with a chord.
//!
//! Run with `cargo run --example quickstart`.

use graph_ot::graph::cycle_with_chord;
use graph_ot::metrics::{hamiltonian_drift, DistanceEstimates};
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = cycle_with_chord();
    let mu = vec![0.4, 0.1, 0.1, 0.2, 0.2];
    let nu = vec![0.1, 0.2, 0.4, 0.2, 0.1];
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::ArithmeticMean, mu, nu, 32)?;

    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?
        .ensure_converged()?;
    println!("newton iterations: {}", report.iterations);
    for (k, r) in report.residual_history.iter().enumerate() {
        println!("  |F_{k}| = {r:.3e}");
    }

    let est = DistanceEstimates::new(&report.trajectory, problem.graph(), problem.model());
    println!("a = {:.6e}  b = {:.6e}  W2 ~ {:.6e}", est.action_estimate, est.initial_kinetic_estimate, est.w2);
    println!(
        "hamiltonian drift: {:.3e}",
        hamiltonian_drift(&report.trajectory, problem.graph(), problem.model())
    );

    let mid = report.trajectory.steps() / 2;
    println!("density at t = {:.2}: {:.4?}", report.trajectory.times[mid], report.trajectory.densities[mid]);
    Ok(())
}

//! Upwind mobility: solve between densities with nearly empty nodes, then check the
//! CFL margins and the explicit density update along the solution.

use graph_ot::graph::WeightedGraph;
use graph_ot::newton::check_cfl;
use graph_ot::system::explicit_density_update;
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    // path 1-2-3-4-5 with the chord (2, 4)
    let graph = WeightedGraph::from_edge_list(&[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 5, 1.0), (2, 4, 0.5)])?;
    let mu = vec![0.45, 0.3, 0.2, 0.03, 0.02];
    let nu = vec![0.02, 0.1, 0.2, 0.3, 0.38];
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::Upwind, mu, nu, 64)?;
    let config = SolveConfig { damping: true, ..SolveConfig::default() };
    let report = newton_solve(&problem, &default_initial_guess(&problem), &config)?.ensure_converged()?;
    println!("upwind solve: {} iterations, W2 ~ {:.4e}", report.iterations, report.w2_action.sqrt());
    println!("min CFL margin {:.4}, densities nonnegative: {}", report.cfl_margin, report.positivity_ok);

    let traj = &report.trajectory;
    let tau = problem.tau();
    let mut worst_bound = f64::INFINITY;
    let mut min_explicit = f64::INFINITY;
    for k in 0..traj.steps() {
        let (_, bound) = check_cfl(problem.graph(), &traj.edge_velocities[k], tau)?;
        worst_bound = worst_bound.min(bound.unwrap_or(f64::INFINITY));
        let next = explicit_density_update(problem.graph(), &traj.densities[k], &traj.edge_velocities[k], tau, problem.model())?;
        min_explicit = min_explicit.min(next.iter().copied().fold(f64::INFINITY, f64::min));
    }
    println!("tau = {tau:.4e}, global sufficient bound tau* = {worst_bound:.4e}");
    println!("smallest density produced by explicit steps: {min_explicit:.3e}");
    Ok(())
}

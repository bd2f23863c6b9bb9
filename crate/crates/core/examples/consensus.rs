//! Relaxation of a random density to the uniform state on a seeded random
//! 10-node network.

use graph_ot::densities::{seeded_random_connected_graph, seeded_random_density};
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = seeded_random_connected_graph(10, 0.3, 7)?;
    println!("graph: {} nodes, {} edges", graph.node_count(), graph.edge_count());
    let mu = seeded_random_density(10, 7)?;
    let nu = vec![0.1; 10];
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::ArithmeticMean, mu, nu, 256)?;
    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;

    println!("converged in {} iterations, W2 ~ {:.5e}", report.iterations, report.w2_action.sqrt());
    for k in (0..=256).step_by(32) {
        let row = &report.trajectory.densities[k];
        let spread = row.iter().map(|r| (r - 0.1).abs()).fold(0.0, f64::max);
        println!("t = {:.3}  max |rho - 1/10| = {spread:.4e}", report.trajectory.times[k]);
    }
    Ok(())
}

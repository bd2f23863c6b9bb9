//! Thresholded flux topology on the complete graph K10.

use graph_ot::densities::seeded_random_density;
use graph_ot::graph::complete_graph;
use graph_ot::metrics::effective_edges;
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = complete_graph(10)?;
    let mu = seeded_random_density(10, 1)?;
    let nu = seeded_random_density(10, 2)?;
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::ArithmeticMean, mu, nu, 32)?;
    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;
    let traj = &report.trajectory;

    for threshold in [1e-3, 1e-2, 5e-2, 1e-1] {
        let counts: Vec<usize> = [1, 9, 17, 25, 33]
            .iter()
            .map(|&level| effective_edges(traj, problem.graph(), level, threshold).map(|e| e.len()))
            .collect::<graph_ot::Result<_>>()?;
        println!("threshold {threshold:>6}: |E_eff| at levels 1, 9, 17, 25, 33 = {counts:?}");
    }
    println!("edges above 5e-2 at t = 0: {:?}", effective_edges(traj, problem.graph(), 1, 5e-2)?);
    Ok(())
}

//! Transport between random densities on two 4-cliques joined by a bridge.
//! The bridge carries the inter-cluster flux.

use graph_ot::densities::seeded_random_density;
use graph_ot::graph::dumbbell;
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = dumbbell(4, 4)?;
    let mu = seeded_random_density(8, 2024)?;
    let nu = seeded_random_density(8, 2025)?;
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::ArithmeticMean, mu, nu, 128)?;
    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;
    let traj = &report.trajectory;
    let g = problem.graph();

    let levels = traj.edge_velocities.len() as f64;
    let mut mean_abs: Vec<(usize, usize, f64)> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| (e.a + 1, e.b + 1, traj.edge_velocities.iter().map(|v| v[k].abs()).sum::<f64>() / levels))
        .collect();
    let overall = mean_abs.iter().map(|e| e.2).sum::<f64>() / mean_abs.len() as f64;
    mean_abs.sort_by(|x, y| y.2.total_cmp(&x.2));

    println!("time-averaged |v| per edge (bridge is (4, 5)):");
    for (i, j, v) in &mean_abs {
        println!("  ({i}, {j})  {v:.4e}");
    }
    println!("mean over edges: {overall:.4e}");
    println!("smallest density along the path: {:.4e}", traj.min_density());
    Ok(())
}

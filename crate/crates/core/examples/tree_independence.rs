//! Solve one problem under the three spanning trees of the 5-node cycle with
//! chord and compare the results.

use graph_ot::densities::seeded_random_density;
use graph_ot::graph::cycle_with_chord;
use graph_ot::scenario::{cycle_with_chord_trees, trajectory_gap};
use graph_ot::{default_initial_guess, newton_solve, MobilityModel, SolveConfig, SpanningTree, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = cycle_with_chord();
    let mu = seeded_random_density(5, 11)?;
    let nu = seeded_random_density(5, 12)?;
    let config = SolveConfig::default();
    let steps = 64;

    let mut reports = Vec::new();
    for pairs in cycle_with_chord_trees() {
        let tree = SpanningTree::from_node_pairs(&graph, &pairs)?;
        let problem = TransportProblem::new(graph.clone(), tree, MobilityModel::ArithmeticMean, mu.clone(), nu.clone(), steps)?;
        let report = newton_solve(&problem, &default_initial_guess(&problem), &config)?.ensure_converged()?;
        println!("tree {pairs:?}: a = {:.12e}  b = {:.12e}", report.w2_action, report.w2_initial);
        reports.push(report);
    }

    let tau = 1.0 / steps as f64;
    for i in 0..3 {
        for j in i + 1..3 {
            println!("T{} vs T{}: max trajectory gap {:.3e}", i + 1, j + 1, trajectory_gap(&reports[i], &reports[j]));
        }
    }
    println!("reference scale tau + eps/tau = {:.3e}", tau + config.tolerance / tau);
    Ok(())
}

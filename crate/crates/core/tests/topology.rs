mod common;

use std::collections::HashSet;

use common::{solve, MEAN};
use graph_ot::densities::seeded_random_density;
use graph_ot::graph::complete_graph;
use graph_ot::metrics::effective_edges;
use graph_ot::TransportProblem;

#[test]
fn effective_edges_on_k10() {
    let mu = seeded_random_density(10, 0).unwrap();
    let nu = seeded_random_density(10, 1).unwrap();
    let p = TransportProblem::with_kruskal_tree(complete_graph(10).unwrap(), MEAN, mu.clone(), nu.clone(), 32).unwrap();
    let r = solve(&p);
    assert!(r.converged);
    let traj = &r.trajectory;
    assert_eq!(traj.densities[0], mu);
    assert_eq!(traj.densities[32], nu);

    let all: HashSet<_> = p.graph().to_edge_list().into_iter().map(|(i, j, _)| (i, j)).collect();
    let thresholds: Vec<f64> = (0..10).map(|k| 1e-4 * 10f64.powf(k as f64 / 3.0)).collect();
    for level in 1..=33 {
        let sets: Vec<HashSet<_>> = thresholds
            .iter()
            .map(|&t| effective_edges(traj, p.graph(), level, t).unwrap().into_iter().collect())
            .collect();
        for w in sets.windows(2) {
            assert!(w[1].is_subset(&w[0]));
        }
        assert!(sets[0].is_subset(&all));
    }
    assert!(effective_edges(traj, p.graph(), 0, 1e-3).is_err());
    assert!(effective_edges(traj, p.graph(), 34, 1e-3).is_err());
}

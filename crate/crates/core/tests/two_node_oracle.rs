mod common;

use common::{solve, two_node_bisect, two_node_graph, two_node_shoot, MEAN};
use graph_ot::{MobilityModel, TransportProblem};

fn compare(model: MobilityModel, omega: f64, mu: [f64; 2], nu: [f64; 2], steps: usize) -> (f64, f64) {
    let problem = TransportProblem::with_kruskal_tree(two_node_graph(omega), model, mu.to_vec(), nu.to_vec(), steps).unwrap();
    let report = solve(&problem);
    assert!(report.converged, "{model:?} {mu:?} -> {nu:?}");
    let v0 = two_node_bisect(model, omega, mu[0], nu[0], steps);
    let (rho, vel) = two_node_shoot(model, omega, mu[0], v0, steps);
    let traj = &report.trajectory;
    let v_err = (traj.tree_velocities[1][0] - vel[1]).abs();
    let rho_err = (0..=steps)
        .map(|k| (traj.densities[k][0] - rho[k]).abs().max((traj.densities[k][1] - (1.0 - rho[k])).abs()))
        .fold(0.0, f64::max);
    (v_err, rho_err)
}

#[test]
fn mean_matches_shooting() {
    for (mu, nu) in [([0.6, 0.4], [0.4, 0.6]), ([0.9, 0.1], [0.2, 0.8]), ([0.15, 0.85], [0.7, 0.3])] {
        for omega in [1.0, 4.0, 0.25] {
            let (dv, drho) = compare(MEAN, omega, mu, nu, 16);
            assert!(dv < 1e-6 && drho < 1e-6, "omega {omega}: {dv:e} {drho:e}");
        }
    }
}

#[test]
fn upwind_matches_shooting() {
    // one-way transport keeps v away from the switching point
    for (mu, nu) in [([0.7, 0.3], [0.3, 0.7]), ([0.2, 0.8], [0.6, 0.4])] {
        let (dv, drho) = compare(MobilityModel::Upwind, 1.0, mu, nu, 16);
        assert!(dv < 1e-6 && drho < 1e-6, "{mu:?}: {dv:e} {drho:e}");
    }
}

#[test]
fn mean_closed_form() {
    // constant v with rho_1 linear in t: v = 2 (mu_1 - nu_1) / sqrt(omega)
    let problem = TransportProblem::with_kruskal_tree(two_node_graph(4.0), MEAN, vec![0.6, 0.4], vec![0.4, 0.6], 16).unwrap();
    let report = solve(&problem);
    for k in 0..=16 {
        assert!((report.trajectory.tree_velocities[k][0] - 0.2).abs() < 1e-12);
        let t = k as f64 / 16.0;
        assert!((report.trajectory.densities[k][0] - (0.6 - 0.2 * t)).abs() < 1e-12);
    }
}

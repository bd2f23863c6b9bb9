//! Post-processing of discrete geodesics: distance estimates, Hamiltonian
//! drift, thresholded flux topology and 1D transport-map recovery.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{Lattice1d, WeightedGraph};
use crate::mobility::MobilityModel;
use crate::system::{kinetic_sum, Trajectory};

/// Two estimates of the squared Wasserstein distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimates {
    /// Time-integrated action `a`.
    pub action_estimate: f64,
    /// Initial kinetic energy `b`.
    pub initial_kinetic_estimate: f64,
    /// `sqrt(a)`.
    pub w2: f64,
}

impl DistanceEstimates {
    pub fn new(trajectory: &Trajectory, graph: &WeightedGraph, model: MobilityModel) -> Self {
        let a = w2_action(trajectory, graph, model);
        Self {
            action_estimate: a,
            initial_kinetic_estimate: w2_initial(trajectory, graph, model),
            w2: a.sqrt(),
        }
    }
}

/// `a = sum_{n=0}^{M-1} tau sum_{e in E} theta_e(rho^n) |v_e^n|^2`, each
/// undirected edge counted once.
pub fn w2_action(trajectory: &Trajectory, graph: &WeightedGraph, model: MobilityModel) -> f64 {
    let tau = trajectory.tau();
    let m = trajectory.steps();
    trajectory.densities[..m]
        .iter()
        .zip(&trajectory.edge_velocities[..m])
        .map(|(rho, v)| tau * kinetic_sum(graph, rho, v, model))
        .sum()
}

/// `b = sum_{e in E} theta_e(rho^0) |v_e^0|^2`.
pub fn w2_initial(trajectory: &Trajectory, graph: &WeightedGraph, model: MobilityModel) -> f64 {
    kinetic_sum(
        graph,
        &trajectory.densities[0],
        &trajectory.edge_velocities[0],
        model,
    )
}

/// Discrete Hamiltonian `1/2 sum_e theta_e v_e^2` at every level.
pub fn hamiltonian_series(trajectory: &Trajectory, graph: &WeightedGraph, model: MobilityModel) -> Vec<f64> {
    trajectory
        .densities
        .iter()
        .zip(&trajectory.edge_velocities)
        .map(|(rho, v)| 0.5 * kinetic_sum(graph, rho, v, model))
        .collect()
}

/// `max_m |H^m - H^0|`.
pub fn hamiltonian_drift(trajectory: &Trajectory, graph: &WeightedGraph, model: MobilityModel) -> f64 {
    let h = hamiltonian_series(trajectory, graph, model);
    h.iter().map(|x| (x - h[0]).abs()).fold(0.0, f64::max)
}

/// Edges with `|v_e| > threshold` at the 1-based time level `level`
/// (`1..=M+1`), as 1-based `(low, high)` node pairs.
pub fn effective_edges(
    trajectory: &Trajectory,
    graph: &WeightedGraph,
    level: usize,
    threshold: f64,
) -> Result<Vec<(usize, usize)>> {
    let levels = trajectory.edge_velocities.len();
    if level == 0 || level > levels {
        return Err(Error::LevelOutOfRange { level, max: levels });
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let v = &trajectory.edge_velocities[level - 1];
    check_len(graph.edge_count(), v.len())?;
    Ok(graph
        .edges()
        .iter()
        .zip(v)
        .filter(|(_, v)| v.abs() > threshold)
        .map(|(e, _)| (e.a + 1, e.b + 1))
        .collect())
}

/// How a nodal velocity is read off the edge velocities of a 1D lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NodalVelocity {
    /// `u_i = v_{i,i+1}`: the one-sided difference `(S_{i+1} - S_i) / dx`.
    #[default]
    Forward,
    /// `u_i = (v_{i-1,i} + v_{i,i+1}) / 2`.
    Centered,
}

/// Initial nodal velocities on a periodic 1D lattice.
pub fn nodal_velocity_1d(
    trajectory: &Trajectory,
    lattice: &Lattice1d,
    reconstruction: NodalVelocity,
) -> Result<Vec<f64>> {
    let g = &lattice.graph;
    let n = g.node_count();
    let v = &trajectory.edge_velocities[0];
    check_len(g.edge_count(), v.len())?;
    let oriented = |i: usize, j: usize| -> f64 {
        let k = g.edge_index(i, j).expect("lattice neighbours are adjacent");
        g.edge(k).sign_at(i) * v[k]
    };
    Ok((0..n)
        .map(|i| {
            let forward = oriented(i, (i + 1) % n);
            match reconstruction {
                NodalVelocity::Forward => forward,
                NodalVelocity::Centered => 0.5 * (oriented((i + n - 1) % n, i) + forward),
            }
        })
        .collect())
}

/// `max_i dist(x_i + u_i, T(x_i))` with periodic wrap distance.
pub fn map_error_1d(
    trajectory: &Trajectory,
    lattice: &Lattice1d,
    exact_map: impl Fn(f64) -> f64,
    reconstruction: NodalVelocity,
) -> Result<f64> {
    let u = nodal_velocity_1d(trajectory, lattice, reconstruction)?;
    let period = lattice.period();
    Ok(u
        .iter()
        .enumerate()
        .map(|(i, ui)| {
            let x = lattice.coordinate(i);
            periodic_distance(x + ui, exact_map(x), period)
        })
        .fold(0.0, f64::max))
}

fn periodic_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Monotone map pushing `1 + sin(2 pi x)/32` onto the uniform density on
/// the unit circle: `T(x) = x - cos(2 pi x)/(64 pi)` (mod 1).
pub fn sine_benchmark_map(x: f64) -> f64 {
    (x - (2.0 * PI * x).cos() / (64.0 * PI)).rem_euclid(1.0)
}

/// Closed-form distance for [`sine_benchmark_map`]: `sqrt(1/2) / (64 pi)`.
pub fn sine_benchmark_w2() -> f64 {
    0.5f64.sqrt() / (64.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::complete_graph;
    use proptest::prelude::*;

    const MEAN: MobilityModel = MobilityModel::ArithmeticMean;

    fn constant_two_node(steps: usize) -> (Trajectory, WeightedGraph) {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        let traj = Trajectory {
            times: (0..=steps).map(|k| k as f64 / steps as f64).collect(),
            densities: vec![vec![0.5, 0.5]; steps + 1],
            tree_velocities: vec![vec![0.4]; steps + 1],
            edge_velocities: vec![vec![0.4]; steps + 1],
        };
        (traj, g)
    }

    #[test]
    fn estimator_examples() {
        for steps in [1, 5, 32] {
            let (traj, g) = constant_two_node(steps);
            assert!((w2_action(&traj, &g, MEAN) - 0.08).abs() < 1e-15);
            assert!((w2_initial(&traj, &g, MEAN) - 0.08).abs() < 1e-15);
            assert_eq!(hamiltonian_drift(&traj, &g, MEAN), 0.0);
        }
        let (mut traj, g) = constant_two_node(4);
        traj.edge_velocities.iter_mut().flatten().for_each(|v| *v = 0.0);
        let est = DistanceEstimates::new(&traj, &g, MEAN);
        assert_eq!((est.action_estimate, est.initial_kinetic_estimate, est.w2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn effective_edge_examples() {
        let (mut traj, g) = constant_two_node(4);
        assert_eq!(effective_edges(&traj, &g, 1, 0.1).unwrap(), vec![(1, 2)]);
        assert!(effective_edges(&traj, &g, 5, 1e9).unwrap().is_empty());
        assert!(matches!(
            effective_edges(&traj, &g, 6, 0.1),
            Err(Error::LevelOutOfRange { level: 6, max: 5 })
        ));
        assert!(matches!(effective_edges(&traj, &g, 0, 0.1), Err(Error::LevelOutOfRange { .. })));
        assert!(effective_edges(&traj, &g, 1, 0.0).is_err());
        traj.edge_velocities.iter_mut().flatten().for_each(|v| *v = 0.0);
        assert!(effective_edges(&traj, &g, 2, f64::MIN_POSITIVE).unwrap().is_empty());
    }

    #[test]
    fn identity_map_has_zero_error() {
        let lattice = Lattice1d::new(16, 0.0, 1.0).unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            densities: vec![vec![1.0 / 16.0; 16]; 2],
            tree_velocities: vec![vec![0.0; 15]; 2],
            edge_velocities: vec![vec![0.0; 16]; 2],
        };
        for r in [NodalVelocity::Forward, NodalVelocity::Centered] {
            assert_eq!(map_error_1d(&traj, &lattice, |x| x, r).unwrap(), 0.0);
        }
    }

    #[test]
    fn nodal_velocity_orientation_across_the_wrap() {
        // S_i = i dx so every forward difference is 1, including the wrap
        // edge where the canonical orientation is reversed
        let lattice = Lattice1d::new(8, 0.0, 1.0).unwrap();
        let g = &lattice.graph;
        let v: Vec<f64> = g
            .edges()
            .iter()
            .map(|e| if e.a == 0 && e.b == 7 { -1.0 } else { 1.0 })
            .collect();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            densities: vec![vec![0.125; 8]; 2],
            tree_velocities: vec![vec![0.0; 7]; 2],
            edge_velocities: vec![v.clone(), v],
        };
        for r in [NodalVelocity::Forward, NodalVelocity::Centered] {
            let u = nodal_velocity_1d(&traj, &lattice, r).unwrap();
            assert!(u.iter().all(|&x| x == 1.0), "{u:?}");
        }
    }

    #[test]
    fn benchmark_map_pushes_forward_the_sine_density() {
        // mass of rho_0 on [0, x] equals the length of [T(0), T(x)]
        let t0 = sine_benchmark_map(0.0);
        for k in 1..10 {
            let x = k as f64 / 10.0;
            let mass = x + (1.0 - (2.0 * PI * x).cos()) / (64.0 * PI);
            let image = (sine_benchmark_map(x) - t0).rem_euclid(1.0);
            assert!((mass - image).abs() < 1e-14, "{x}");
        }
        // displacement has zero mean, and its L2 norm under rho_0 is the distance
        let n = 4096;
        let (mut mean, mut sq) = (0.0, 0.0);
        for i in 0..n {
            let x = (i as f64 + 0.5) / n as f64;
            let mut d = sine_benchmark_map(x) - x;
            d -= d.round();
            mean += d / n as f64;
            sq += (1.0 + (2.0 * PI * x).sin() / 32.0) * d * d / n as f64;
        }
        assert!(mean.abs() < 1e-15);
        assert!((sq.sqrt() - sine_benchmark_w2()).abs() < 1e-9);
        assert!((sine_benchmark_w2() - 3.517e-3).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn effective_edges_are_nested(seed in proptest::collection::vec(-3.0f64..3.0, 45),
                                      t1 in 1e-3f64..3.0, t2 in 1e-3f64..3.0) {
            let g = complete_graph(10).unwrap();
            let traj = Trajectory {
                times: vec![0.0, 1.0],
                densities: vec![vec![0.1; 10]; 2],
                tree_velocities: vec![vec![0.0; 9]; 2],
                edge_velocities: vec![seed.clone(), seed],
            };
            let (lo, hi) = (t1.min(t2), t1.max(t2));
            let big = effective_edges(&traj, &g, 1, lo).unwrap();
            let small = effective_edges(&traj, &g, 1, hi).unwrap();
            prop_assert!(small.iter().all(|e| big.contains(e)));
        }

        #[test]
        fn estimators_are_nonnegative(rho in proptest::collection::vec(0.0f64..1.0, 10),
                                      v in proptest::collection::vec(-5.0f64..5.0, 45)) {
            let g = complete_graph(10).unwrap();
            let traj = Trajectory {
                times: vec![0.0, 0.5, 1.0],
                densities: vec![rho; 3],
                tree_velocities: vec![vec![0.0; 9]; 3],
                edge_velocities: vec![v; 3],
            };
            for model in [MEAN, MobilityModel::Upwind] {
                prop_assert!(w2_action(&traj, &g, model) >= 0.0);
                prop_assert!(w2_initial(&traj, &g, model) >= 0.0);
            }
        }
    }
}

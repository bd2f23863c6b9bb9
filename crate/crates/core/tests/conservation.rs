mod common;

use common::{map_benchmark, solve, MEAN};
use graph_ot::densities::{seeded_random_connected_graph, seeded_random_density};
use graph_ot::metrics::hamiltonian_drift;
use graph_ot::system::divergence;
use graph_ot::{MobilityModel, TransportProblem};
use proptest::prelude::*;

#[test]
fn rows_keep_unit_mass() {
    for seed in 0..6 {
        let g = seeded_random_connected_graph(9, 0.3, seed).unwrap();
        let model = if seed % 2 == 0 { MEAN } else { MobilityModel::Upwind };
        let p = TransportProblem::with_kruskal_tree(
            g,
            model,
            seeded_random_density(9, seed).unwrap(),
            seeded_random_density(9, seed + 50).unwrap(),
            24,
        )
        .unwrap();
        let r = solve(&p);
        if !r.converged {
            continue;
        }
        for row in &r.trajectory.densities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }
}

proptest! {
    #[test]
    fn divergence_sums_to_zero(
        n in 2usize..15,
        seed in any::<u64>(),
        velocity in proptest::collection::vec(-100.0f64..100.0, 105),
        upwind in any::<bool>(),
    ) {
        let g = seeded_random_connected_graph(n, 0.5, seed).unwrap();
        let rho = seeded_random_density(n, seed ^ 0xabc).unwrap();
        let v = &velocity[..g.edge_count()];
        let model = if upwind { MobilityModel::Upwind } else { MEAN };
        let div = divergence(&g, &rho, v, model).unwrap();
        let flux: f64 = g
            .edges()
            .iter()
            .zip(v)
            .map(|(e, &x)| (e.sqrt_weight * x * model.eval(rho[e.a], rho[e.b], x)).powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!(div.iter().sum::<f64>().abs() <= 1e-12 * flux.max(f64::MIN_POSITIVE));
    }
}

#[test]
fn hamiltonian_drift_is_first_order_in_time() {
    let (_, p64, r64) = map_benchmark(64, 64);
    let (_, p128, r128) = map_benchmark(64, 128);
    let d64 = hamiltonian_drift(&r64.trajectory, p64.graph(), MEAN);
    let d128 = hamiltonian_drift(&r128.trajectory, p128.graph(), MEAN);
    let ratio = d64 / d128;
    assert!((1.5..=2.5).contains(&ratio), "{d64:e} / {d128:e} = {ratio}");
}

#[test]
fn estimator_gap_shrinks_with_step() {
    let (_, _, coarse) = map_benchmark(32, 32);
    let (_, _, fine) = map_benchmark(32, 64);
    let gap = |r: &graph_ot::SolveReport| (r.w2_action - r.w2_initial).abs();
    let ratio = gap(&coarse) / gap(&fine);
    assert!((1.5..=2.5).contains(&ratio), "{ratio}");
}

//! Grid refinement study on the unit circle: `1 + sin(2 pi x)/32` to the
//! uniform density, with the recovered transport map compared to the exact
//! one. Build with `--release`; the finest grid has 16256 unknowns.

use std::time::Instant;

use graph_ot::densities::benchmark_1d_map_densities;
use graph_ot::metrics::{map_error_1d, sine_benchmark_map, sine_benchmark_w2, NodalVelocity};
use graph_ot::{default_initial_guess, newton_solve, Lattice1d, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    println!("exact W2 = {:.4e}", sine_benchmark_w2());
    println!("{:>8} {:>8} {:>11} {:>11} {:>10}", "dx", "dt", "W2", "map error", "time (s)");
    for n in [16, 32, 64, 128] {
        let lattice = Lattice1d::new(n, 0.0, 1.0)?;
        let (mu, nu) = benchmark_1d_map_densities(&lattice)?;
        let problem =
            TransportProblem::with_kruskal_tree(lattice.graph.clone(), MobilityModel::ArithmeticMean, mu, nu, 64)?;
        let start = Instant::now();
        let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;
        let seconds = start.elapsed().as_secs_f64();
        let error = map_error_1d(&report.trajectory, &lattice, sine_benchmark_map, NodalVelocity::Forward)?;
        println!(
            "{:>8} {:>8} {:>11.3e} {:>11.3e} {seconds:>10.3}",
            format!("1/{n}"),
            "1/64",
            report.w2_action.sqrt(),
            error
        );
    }
    Ok(())
}

//! Analytic, finite-difference and chord Jacobians on the same problem.

use std::time::Instant;

use graph_ot::densities::seeded_random_density;
use graph_ot::graph::dumbbell;
use graph_ot::{default_initial_guess, newton_solve, JacobianMode, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let graph = dumbbell(4, 4)?;
    let mu = seeded_random_density(8, 5)?;
    let nu = seeded_random_density(8, 6)?;
    let problem = TransportProblem::with_kruskal_tree(graph, MobilityModel::ArithmeticMean, mu, nu, 64)?;
    let x0 = default_initial_guess(&problem);

    for mode in [JacobianMode::Analytic, JacobianMode::FiniteDifference, JacobianMode::Chord] {
        let config = SolveConfig { jacobian_mode: mode, max_iterations: 200, ..SolveConfig::default() };
        let start = Instant::now();
        let report = newton_solve(&problem, &x0, &config)?;
        println!(
            "{:>9}: converged={} iterations={:>3} a={:.10e} time={:.3}s",
            mode.to_string(),
            report.converged,
            report.iterations,
            report.w2_action,
            start.elapsed().as_secs_f64()
        );
        let tail: Vec<String> = report.residual_history.iter().rev().take(4).rev().map(|r| format!("{r:.2e}")).collect();
        println!("           last residuals {}", tail.join(" "));
    }
    Ok(())
}

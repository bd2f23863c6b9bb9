//! Gaussian bumps on periodic lattices: a 64-node line over [-1, 3] and a
//! coarse 16 x 16 torus over [-1, 3]^2.

use graph_ot::densities::{gaussian_density_1d, gaussian_density_2d, Gaussian2d};
use graph_ot::{default_initial_guess, newton_solve, Lattice1d, Lattice2d, MobilityModel, SolveConfig, TransportProblem};

fn main() -> graph_ot::Result<()> {
    let line = Lattice1d::new(64, -1.0, 3.0)?;
    let mu = gaussian_density_1d(&line, 15.0, 1.4, 1e-4)?;
    let nu = gaussian_density_1d(&line, 15.0, 1.7, 1e-4)?;
    let problem = TransportProblem::with_kruskal_tree(line.graph.clone(), MobilityModel::ArithmeticMean, mu, nu, 32)?;
    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;
    println!("1D: {} iterations, W2 ~ {:.4e} (centre shift 0.3)", report.iterations, report.w2_action.sqrt());
    let peak = |row: &[f64]| {
        let k = (0..row.len()).max_by(|&i, &j| row[i].total_cmp(&row[j])).unwrap();
        line.coordinate(k)
    };
    for k in [0, 8, 16, 24, 32] {
        println!("  t = {:.2}: peak at x = {:.3}", report.trajectory.times[k], peak(&report.trajectory.densities[k]));
    }

    let torus = Lattice2d::new(16, -1.0, 3.0)?;
    let bump = |b, d| Gaussian2d { a: 10.0, b, c: 10.0, d, w: 1.0, eps: 1e-4 };
    let mu = gaussian_density_2d(&torus, bump(0.5, 1.5))?;
    let nu = gaussian_density_2d(&torus, bump(1.5, 1.3))?;
    let problem = TransportProblem::with_kruskal_tree(torus.graph.clone(), MobilityModel::ArithmeticMean, mu, nu, 32)?;
    let report = newton_solve(&problem, &default_initial_guess(&problem), &SolveConfig::default())?.ensure_converged()?;
    println!(
        "2D: {} iterations, W2 ~ {:.4e} (centre shift {:.4})",
        report.iterations,
        report.w2_action.sqrt(),
        (1.0f64 + 0.04).sqrt()
    );
    Ok(())
}

//! Newton iteration for the discrete geodesic boundary value problem.

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::WeightedGraph;
use crate::jacobian::{assemble_jacobian_analytic, assemble_jacobian_fd};
use crate::linsolve::{Factorization, TripletMatrix};
use crate::metrics;
use crate::system::{residual_into, unpack, SolverState, TransportProblem, Trajectory};

/// Reciprocal condition number below which a warning is logged.
pub const RCOND_WARNING: f64 = 1e-12;

/// Step halvings tried per iteration when damping is enabled.
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum JacobianMode {
    #[default]
    Analytic,
    FiniteDifference,
    /// Analytic Jacobian factorized once at the initial iterate.
    Chord,
}

impl fmt::Display for JacobianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JacobianMode::Analytic => "analytic",
            JacobianMode::FiniteDifference => "fd",
            JacobianMode::Chord => "chord",
        })
    }
}

impl FromStr for JacobianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(JacobianMode::Analytic),
            "fd" | "finite-difference" => Ok(JacobianMode::FiniteDifference),
            "chord" => Ok(JacobianMode::Chord),
            other => Err(Error::InvalidConfig(format!("unknown jacobian mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Stop once the Euclidean residual norm drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub jacobian_mode: JacobianMode,
    /// Relative forward-difference step: `h_j = fd_step * (1 + |x_j|)`.
    pub fd_step: f64,
    /// Halve the Newton step until the residual norm decreases.
    pub damping: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            jacobian_mode: JacobianMode::Analytic,
            fd_step: 1e-7,
            damping: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::InvalidConfig("fd_step must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Every density at every level is nonnegative.
    pub positivity_ok: bool,
    /// `min_{i,m} 1 - tau sum_j sqrt(w_ij) (v_ij^m)^+` over levels `0..M-1`.
    pub cfl_margin: f64,
    pub w2_action: f64,
    pub w2_initial: f64,
    /// Smallest reciprocal-condition estimate across factorizations; `None`
    /// when no factorization was needed.
    pub min_rcond: Option<f64>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history is never empty")
    }

    /// `Err(MaxIterationsExceeded)` when the solve stopped without converging.
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterationsExceeded {
                iterations: self.iterations,
                residual: self.final_residual(),
            })
        }
    }
}

/// Densities interpolated linearly between `mu` and `nu`, zero velocities.
pub fn default_initial_guess(problem: &TransportProblem) -> SolverState {
    let layout = problem.layout();
    let mut x = SolverState::zeros(layout);
    let m = layout.steps as f64;
    for k in 1..layout.steps {
        let s = k as f64 / m;
        for i in 0..layout.free_nodes {
            x.0[layout.density(k, i)] = (1.0 - s) * problem.mu()[i] + s * problem.nu()[i];
        }
    }
    x
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn factorize(matrix: &TripletMatrix, iteration: usize, min_rcond: &mut Option<f64>) -> Result<Factorization> {
    let lu = Factorization::new(matrix).map_err(|detail| Error::SingularJacobian { iteration, detail })?;
    let rcond = lu.rcond_estimate();
    *min_rcond = Some(min_rcond.map_or(rcond, |m| m.min(rcond)));
    if rcond == 0.0 {
        return Err(Error::SingularJacobian {
            iteration,
            detail: "factorization produced non-finite values (rcond estimate 0)".into(),
        });
    }
    if rcond < RCOND_WARNING {
        warn!("ill-conditioned Jacobian at iteration {iteration}: rcond ~ {rcond:e}");
    }
    Ok(lu)
}

/// Runs Newton's method from `x0` until `|F(x)| < tolerance` or the
/// iteration limit. Running out of iterations is reported through
/// `converged = false`, not as an error.
pub fn newton_solve(
    problem: &TransportProblem,
    x0: &SolverState,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let layout = problem.layout();
    check_len(layout.len(), x0.len())?;

    let mut x = x0.0.clone();
    let mut f = vec![0.0; layout.len()];
    residual_into(problem, &x, &mut f);
    let mut fnorm = norm(&f);
    if !fnorm.is_finite() {
        return Err(Error::NonFiniteResidual(0));
    }
    let mut history = vec![fnorm];
    let mut min_rcond = None;
    let mut chord: Option<Factorization> = None;
    let mut iterations = 0;
    let mut trial = vec![0.0; layout.len()];
    let mut f_trial = vec![0.0; layout.len()];

    while fnorm >= config.tolerance && iterations < config.max_iterations {
        let fresh;
        let lu = match config.jacobian_mode {
            JacobianMode::Chord => {
                if chord.is_none() {
                    let j = assemble_jacobian_analytic(problem, &SolverState(x.clone()))?;
                    chord = Some(factorize(&j, iterations, &mut min_rcond)?);
                }
                chord.as_ref().expect("chord factorization exists")
            }
            JacobianMode::Analytic => {
                let j = assemble_jacobian_analytic(problem, &SolverState(x.clone()))?;
                fresh = factorize(&j, iterations, &mut min_rcond)?;
                &fresh
            }
            JacobianMode::FiniteDifference => {
                let j = assemble_jacobian_fd(problem, &SolverState(x.clone()), config.fd_step)?;
                fresh = factorize(&j, iterations, &mut min_rcond)?;
                &fresh
            }
        };
        let step = lu.solve(&f);
        if step.iter().any(|d| !d.is_finite()) {
            return Err(Error::SingularJacobian {
                iteration: iterations,
                detail: "Newton step is not finite".into(),
            });
        }

        let mut lambda = 1.0;
        let mut halvings = 0;
        let trial_norm = loop {
            for ((t, xi), d) in trial.iter_mut().zip(&x).zip(&step) {
                *t = xi - lambda * d;
            }
            residual_into(problem, &trial, &mut f_trial);
            let n = norm(&f_trial);
            if !config.damping || (n.is_finite() && n < fnorm) || halvings == MAX_HALVINGS {
                break n;
            }
            lambda *= 0.5;
            halvings += 1;
        };
        iterations += 1;
        if !trial_norm.is_finite() {
            return Err(Error::NonFiniteResidual(iterations));
        }
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut f, &mut f_trial);
        fnorm = trial_norm;
        history.push(fnorm);
        debug!("newton iteration {iterations}: |F| = {fnorm:e} (step scale {lambda})");
    }

    let trajectory = unpack(problem, &SolverState(x))?;
    Ok(build_report(problem, trajectory, fnorm < config.tolerance, iterations, history, min_rcond))
}

fn build_report(
    problem: &TransportProblem,
    trajectory: Trajectory,
    converged: bool,
    iterations: usize,
    residual_history: Vec<f64>,
    min_rcond: Option<f64>,
) -> SolveReport {
    let g = problem.graph();
    let model = problem.model();
    let tau = problem.tau();
    let positivity_ok = trajectory.densities.iter().flatten().all(|&r| r >= 0.0);
    let steps = trajectory.steps();
    let cfl_margin = trajectory.edge_velocities[..steps]
        .iter()
        .flat_map(|v| cfl_margins(g, v, tau))
        .fold(f64::INFINITY, f64::min);
    let w2_action = metrics::w2_action(&trajectory, g, model);
    let w2_initial = metrics::w2_initial(&trajectory, g, model);
    SolveReport {
        trajectory,
        converged,
        iterations,
        residual_history,
        positivity_ok,
        cfl_margin,
        w2_action,
        w2_initial,
        min_rcond,
    }
}

/// Per-node margins `1 - tau sum_{j~i} sqrt(w_ij) (v_ij)^+`, where `v_ij`
/// is the velocity oriented out of `i`.
pub(crate) fn cfl_margins(graph: &WeightedGraph, v_edges: &[f64], tau: f64) -> Vec<f64> {
    let mut outflow = vec![0.0; graph.node_count()];
    for (e, &v) in graph.edges().iter().zip(v_edges) {
        if v > 0.0 {
            outflow[e.a] += e.sqrt_weight * v;
        } else if v < 0.0 {
            outflow[e.b] += e.sqrt_weight * (-v);
        }
    }
    outflow.into_iter().map(|o| 1.0 - tau * o).collect()
}

/// Local CFL margins and the sufficient global step bound
/// `1 / (d_max sqrt(w_max) |v|_inf)`. The bound is `None` (unbounded) for
/// zero velocities.
pub fn check_cfl(graph: &WeightedGraph, v_edges: &[f64], tau: f64) -> Result<(Vec<f64>, Option<f64>)> {
    check_len(graph.edge_count(), v_edges.len())?;
    let margins = cfl_margins(graph, v_edges, tau);
    let vmax = v_edges.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bound = (vmax > 0.0)
        .then(|| 1.0 / (graph.max_degree() as f64 * graph.max_weight().sqrt() * vmax));
    Ok((margins, bound))
}

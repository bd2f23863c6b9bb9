//! Jacobian of the discrete residual: analytic sparse assembly and a
//! forward-difference approximation that exploits the two-level coupling
//! in time.

use crate::error::{check_len, Result};
use crate::linsolve::TripletMatrix;
use crate::system::{level_residual, residual_into, SolverState, TransportProblem, Workspace};

/// Exact partial derivatives of the residual. For the upwind model the
/// branch `v >= 0` is selected on the switching set.
pub fn assemble_jacobian_analytic(problem: &TransportProblem, x: &SolverState) -> Result<TripletMatrix> {
    let layout = problem.layout();
    check_len(layout.len(), x.len())?;
    let x = x.as_slice();
    let g = problem.graph();
    let tree = problem.tree();
    let model = problem.model();
    let expansion = tree.expansion_table();
    let tau = problem.tau();
    let n1 = layout.free_nodes;
    let last = n1;
    let m = layout.steps;

    let mut jac = TripletMatrix::new(layout.len());
    let mut ws = Workspace::new(problem);
    let mut scratch = vec![0.0; n1];
    let mut touched: Vec<usize> = Vec::new();

    for k in 0..m {
        ws.load_density(problem, x, k);
        tree.expand_into(
            crate::system::tree_velocities_at(layout, x, k),
            &mut ws.v_edges,
        );
        let interior = k >= 1;

        for i in 0..n1 {
            let row = layout.density_equation(k, i);
            if k + 1 < m {
                jac.push(row, layout.density(k + 1, i), 1.0);
            }
            if interior {
                jac.push(row, layout.density(k, i), -1.0);
            }
            let mut last_coef = 0.0;
            for &(_, e_idx) in g.neighbors(i) {
                let e = g.edge(e_idx);
                let v = ws.v_edges[e_idx];
                let s = e.sign_at(i);
                let scale = tau * s * e.sqrt_weight;
                if interior {
                    let (pa, pb) = model.partials(v);
                    for (node, p) in [(e.a, pa), (e.b, pb)] {
                        let c = scale * v * p;
                        if c == 0.0 {
                            continue;
                        }
                        if node == last {
                            last_coef += c;
                        } else {
                            jac.push(row, layout.density(k, node), c);
                        }
                    }
                }
                let theta = model.eval(ws.rho[e.a], ws.rho[e.b], v);
                for &(f, coef) in &expansion[e_idx] {
                    jac.push(row, layout.velocity(k, f), scale * theta * coef);
                }
            }
            if last_coef != 0.0 {
                for node in 0..n1 {
                    jac.push(row, layout.density(k, node), -last_coef);
                }
            }
        }

        for (f, tf) in tree.edges().enumerate() {
            let row = layout.velocity_equation(k, f);
            jac.push(row, layout.velocity(k + 1, f), 1.0);
            jac.push(row, layout.velocity(k, f), -1.0);
            // tau sqrt(w_f) (dK_b/dv - dK_a/dv), dK_n/dv_g = sum_{e~n} v_e q_{e,n} C_{e,g}
            for (node, sign) in [(tf.b, 1.0), (tf.a, -1.0)] {
                for &(_, e_idx) in g.neighbors(node) {
                    let e = g.edge(e_idx);
                    let v = ws.v_edges[e_idx];
                    let (pa, pb) = model.partials(v);
                    let q = if node == e.a { pa } else { pb };
                    let c = sign * tau * tf.sqrt_weight * v * q;
                    if c == 0.0 {
                        continue;
                    }
                    for &(gi, coef) in &expansion[e_idx] {
                        if scratch[gi] == 0.0 {
                            touched.push(gi);
                        }
                        scratch[gi] += c * coef;
                    }
                }
            }
            for gi in touched.drain(..) {
                let value = std::mem::take(&mut scratch[gi]);
                if value != 0.0 {
                    jac.push(row, layout.velocity(k, gi), value);
                }
            }
        }
    }
    Ok(jac)
}

/// Forward differences `(F(x + h e_j) - F(x)) / h` with
/// `h = rel_step * (1 + |x_j|)`. Only the two residual levels coupled to
/// each unknown are re-evaluated.
pub fn assemble_jacobian_fd(
    problem: &TransportProblem,
    x: &SolverState,
    rel_step: f64,
) -> Result<TripletMatrix> {
    let layout = problem.layout();
    check_len(layout.len(), x.len())?;
    let n1 = layout.free_nodes;
    let m = layout.steps;
    let mut base = vec![0.0; layout.len()];
    residual_into(problem, x.as_slice(), &mut base);

    let mut xp = x.0.clone();
    let mut ws = Workspace::new(problem);
    let mut rho_out = vec![0.0; n1];
    let mut v_out = vec![0.0; n1];
    let mut jac = TripletMatrix::new(layout.len());

    for col in 0..layout.len() {
        let level = if col < layout.velocity_offset() {
            col / n1 + 1
        } else {
            (col - layout.velocity_offset()) / n1
        };
        let original = xp[col];
        let trial = original + rel_step * (1.0 + original.abs());
        let h = trial - original;
        xp[col] = trial;
        let first = level.saturating_sub(1);
        let end = (level + 1).min(m);
        for k in first..end {
            level_residual(problem, &xp, k, &mut ws, &mut rho_out, &mut v_out);
            for i in 0..n1 {
                for (row, value) in [
                    (layout.density_equation(k, i), rho_out[i]),
                    (layout.velocity_equation(k, i), v_out[i]),
                ] {
                    let d = (value - base[row]) / h;
                    if d != 0.0 {
                        jac.push(row, col, d);
                    }
                }
            }
        }
        xp[col] = original;
    }
    Ok(jac)
}

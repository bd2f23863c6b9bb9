//! Discrete operators, the reduced geodesic right-hand side and the fully
//! discrete residual with left-rectangle quadrature.
//!
//! Time levels are 0-based here: level `k = 0..=M` sits at `t = k * tau`,
//! level 0 carries `mu` and level `M` carries `nu`. Node `N-1` (the last
//! node) is eliminated through mass conservation.
//!
//! Unknown vector layout (length `2 M (N-1)`):
//! interior densities `rho_i^k` for `k = 1..M-1`, `i < N-1`, ordered by level
//! then node; followed by tree velocities `v_f^k` for `k = 0..=M`, ordered
//! by level then tree edge. Residuals: density equations for `k = 0..M-1`
//! (level, node), then velocity equations for `k = 0..M-1` (level, edge).

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::WeightedGraph;
use crate::mobility::MobilityModel;
use crate::tree::SpanningTree;

/// Tolerance on the unit mass of the endpoint densities.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Graph, gauge tree, mobility, endpoint densities and time grid.
#[derive(Debug, Clone)]
pub struct TransportProblem {
    graph: WeightedGraph,
    tree: SpanningTree,
    model: MobilityModel,
    mu: Vec<f64>,
    nu: Vec<f64>,
    steps: usize,
}

impl TransportProblem {
    pub fn new(
        graph: WeightedGraph,
        tree: SpanningTree,
        model: MobilityModel,
        mu: Vec<f64>,
        nu: Vec<f64>,
        steps: usize,
    ) -> Result<Self> {
        if !tree.matches_graph(&graph) {
            return Err(Error::InvalidConfig(
                "spanning tree was built for a different graph".into(),
            ));
        }
        if steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        for (name, rho) in [("mu", &mu), ("nu", &nu)] {
            check_len(graph.node_count(), rho.len())?;
            validate_density(name, rho, model.requires_interior())?;
        }
        Ok(Self {
            graph,
            tree,
            model,
            mu,
            nu,
            steps,
        })
    }

    /// Convenience constructor using the Kruskal tree of `graph`.
    pub fn with_kruskal_tree(
        graph: WeightedGraph,
        model: MobilityModel,
        mu: Vec<f64>,
        nu: Vec<f64>,
        steps: usize,
    ) -> Result<Self> {
        let tree = SpanningTree::kruskal(&graph);
        Self::new(graph, tree, model, mu, nu, steps)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn model(&self) -> MobilityModel {
        self.model
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Number of time intervals `M`.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.steps as f64
    }

    pub fn layout(&self) -> StateLayout {
        StateLayout {
            free_nodes: self.graph.node_count() - 1,
            steps: self.steps,
        }
    }

    /// Same problem on a different gauge tree.
    pub fn with_tree(&self, tree: SpanningTree) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            tree,
            self.model,
            self.mu.clone(),
            self.nu.clone(),
            self.steps,
        )
    }

    /// Same problem with a different number of time steps.
    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        Self::new(
            self.graph.clone(),
            self.tree.clone(),
            self.model,
            self.mu.clone(),
            self.nu.clone(),
            steps,
        )
    }
}

fn validate_density(name: &str, rho: &[f64], strict: bool) -> Result<()> {
    if let Some((i, &v)) = rho
        .iter()
        .enumerate()
        .find(|(_, &v)| !v.is_finite() || v < 0.0 || (strict && v <= 0.0))
    {
        return Err(Error::InvalidDensity(format!(
            "{name}[{}] = {v} (must be {})",
            i + 1,
            if strict { "strictly positive" } else { "nonnegative" }
        )));
    }
    let mass: f64 = rho.iter().sum();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidDensity(format!(
            "{name} has mass {mass}, expected 1"
        )));
    }
    Ok(())
}

/// Index arithmetic for the packed unknown and residual vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    /// `N - 1`: free densities per level, also the number of tree edges.
    pub free_nodes: usize,
    /// `M`.
    pub steps: usize,
}

impl StateLayout {
    /// `2 M (N - 1)`.
    pub fn len(&self) -> usize {
        2 * self.steps * self.free_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of the velocity block in the unknown vector.
    pub fn velocity_offset(&self) -> usize {
        (self.steps - 1) * self.free_nodes
    }

    /// Unknown index of `rho_i^k` for interior `k` in `1..M`.
    #[inline]
    pub fn density(&self, level: usize, node: usize) -> usize {
        debug_assert!(level >= 1 && level < self.steps && node < self.free_nodes);
        (level - 1) * self.free_nodes + node
    }

    /// Unknown index of `v_f^k`, `k` in `0..=M`.
    #[inline]
    pub fn velocity(&self, level: usize, edge: usize) -> usize {
        self.velocity_offset() + level * self.free_nodes + edge
    }

    /// Residual index of the density equation at `(level, node)`.
    #[inline]
    pub fn density_equation(&self, level: usize, node: usize) -> usize {
        level * self.free_nodes + node
    }

    /// Residual index of the velocity equation at `(level, edge)`.
    #[inline]
    pub fn velocity_equation(&self, level: usize, edge: usize) -> usize {
        (self.steps + level) * self.free_nodes + edge
    }
}

/// Packed unknown vector `x = (interior densities, tree velocities)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState(pub Vec<f64>);

impl SolverState {
    pub fn zeros(layout: StateLayout) -> Self {
        Self(vec![0.0; layout.len()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Densities and velocities at every time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(M+1) x N`; row 0 is `mu`, row `M` is `nu`.
    pub densities: Vec<Vec<f64>>,
    /// `(M+1) x (N-1)`, in tree order.
    pub tree_velocities: Vec<Vec<f64>>,
    /// `(M+1) x |E|`, canonical edge order, `v_{a,b}` with `a < b`.
    pub edge_velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.steps() as f64
    }

    /// Largest deviation of a density row from unit mass.
    pub fn max_mass_defect(&self) -> f64 {
        self.densities
            .iter()
            .map(|row| (row.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn min_density(&self) -> f64 {
        self.densities
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `div_i = sum_{j ~ i} sqrt(w_ij) v_{i,j} theta_ij(rho)`.
pub fn divergence(
    graph: &WeightedGraph,
    rho: &[f64],
    v_edges: &[f64],
    model: MobilityModel,
) -> Result<Vec<f64>> {
    check_len(graph.node_count(), rho.len())?;
    check_len(graph.edge_count(), v_edges.len())?;
    let mut div = vec![0.0; graph.node_count()];
    divergence_into(graph, rho, v_edges, model, &mut div);
    Ok(div)
}

fn divergence_into(
    graph: &WeightedGraph,
    rho: &[f64],
    v_edges: &[f64],
    model: MobilityModel,
    div: &mut [f64],
) {
    div.iter_mut().for_each(|d| *d = 0.0);
    for (e, &v) in graph.edges().iter().zip(v_edges) {
        let flux = e.sqrt_weight * v * model.eval(rho[e.a], rho[e.b], v);
        div[e.a] += flux;
        div[e.b] -= flux;
    }
}

/// `H = 1/2 sum_{e in E} v_e^2 theta_e(rho)`, each undirected edge once.
pub fn hamiltonian(
    graph: &WeightedGraph,
    rho: &[f64],
    v_edges: &[f64],
    model: MobilityModel,
) -> Result<f64> {
    check_len(graph.node_count(), rho.len())?;
    check_len(graph.edge_count(), v_edges.len())?;
    if let Some((i, &value)) = rho.iter().enumerate().find(|(_, &r)| r < 0.0) {
        return Err(Error::NegativeDensity { node: i + 1, value });
    }
    Ok(0.5 * kinetic_sum(graph, rho, v_edges, model))
}

/// `sum_e theta_e(rho) v_e^2`.
pub(crate) fn kinetic_sum(
    graph: &WeightedGraph,
    rho: &[f64],
    v_edges: &[f64],
    model: MobilityModel,
) -> f64 {
    graph
        .edges()
        .iter()
        .zip(v_edges)
        .map(|(e, &v)| model.eval(rho[e.a], rho[e.b], v) * v * v)
        .sum()
}

/// Right-hand side of the reduced geodesic system at one instant:
/// `drho` for the first `N-1` nodes and `dv` for the tree edges.
pub fn reduced_rhs(
    problem: &TransportProblem,
    rho: &[f64],
    v_tree: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = problem.graph();
    check_len(g.node_count(), rho.len())?;
    check_len(problem.tree().len(), v_tree.len())?;
    if let Some((i, &value)) = rho.iter().enumerate().find(|(_, &r)| r < 0.0) {
        return Err(Error::NegativeDensity { node: i + 1, value });
    }
    let mut ws = Workspace::new(problem);
    let n1 = problem.tree().len();
    let (mut drho, mut dv) = (vec![0.0; n1], vec![0.0; n1]);
    ws.rhs(problem, rho, v_tree, &mut drho, &mut dv);
    Ok((drho, dv))
}

/// Scratch buffers for per-level evaluations.
pub(crate) struct Workspace {
    pub v_edges: Vec<f64>,
    pub div: Vec<f64>,
    /// `K_i = 1/2 sum_{j ~ i} v_ij^2 d theta_ij / d rho_i`.
    pub kinetic: Vec<f64>,
    pub rho: Vec<f64>,
}

impl Workspace {
    pub fn new(problem: &TransportProblem) -> Self {
        let g = problem.graph();
        Self {
            v_edges: vec![0.0; g.edge_count()],
            div: vec![0.0; g.node_count()],
            kinetic: vec![0.0; g.node_count()],
            rho: vec![0.0; g.node_count()],
        }
    }

    /// Evaluates the reduced right-hand side for `rho` (all `N` nodes).
    /// Leaves the expanded edge velocities in `self.v_edges`.
    pub fn rhs(
        &mut self,
        problem: &TransportProblem,
        rho: &[f64],
        v_tree: &[f64],
        drho: &mut [f64],
        dv: &mut [f64],
    ) {
        let g = problem.graph();
        let model = problem.model();
        problem.tree().expand_into(v_tree, &mut self.v_edges);
        divergence_into(g, rho, &self.v_edges, model, &mut self.div);
        self.kinetic.iter_mut().for_each(|k| *k = 0.0);
        for (e, &v) in g.edges().iter().zip(&self.v_edges) {
            let (pa, pb) = model.partials(v);
            let half_sq = 0.5 * v * v;
            self.kinetic[e.a] += half_sq * pa;
            self.kinetic[e.b] += half_sq * pb;
        }
        for (d, &div) in drho.iter_mut().zip(&self.div) {
            *d = -div;
        }
        for (d, f) in dv.iter_mut().zip(problem.tree().edges()) {
            *d = -f.sqrt_weight * (self.kinetic[f.b] - self.kinetic[f.a]);
        }
    }

    /// Fills `self.rho` with the full density at `level`.
    pub fn load_density(&mut self, problem: &TransportProblem, x: &[f64], level: usize) {
        let layout = problem.layout();
        if level == 0 {
            self.rho.copy_from_slice(problem.mu());
        } else if level == layout.steps {
            self.rho.copy_from_slice(problem.nu());
        } else {
            let start = layout.density(level, 0);
            let partial = &x[start..start + layout.free_nodes];
            self.rho[..layout.free_nodes].copy_from_slice(partial);
            self.rho[layout.free_nodes] = 1.0 - partial.iter().sum::<f64>();
        }
    }
}

/// Tree velocities at `level` inside the packed vector.
#[inline]
pub(crate) fn tree_velocities_at(layout: StateLayout, x: &[f64], level: usize) -> &[f64] {
    let start = layout.velocity(level, 0);
    &x[start..start + layout.free_nodes]
}

/// Density unknown at `(level, node)`, or the boundary value.
#[inline]
fn free_density(problem: &TransportProblem, x: &[f64], level: usize, node: usize) -> f64 {
    let layout = problem.layout();
    if level == 0 {
        problem.mu()[node]
    } else if level == layout.steps {
        problem.nu()[node]
    } else {
        x[layout.density(level, node)]
    }
}

/// Residual equations of interval `level -> level + 1`, written into
/// `out_rho` and `out_v` (each of length `N-1`).
pub(crate) fn level_residual(
    problem: &TransportProblem,
    x: &[f64],
    level: usize,
    ws: &mut Workspace,
    out_rho: &mut [f64],
    out_v: &mut [f64],
) {
    let layout = problem.layout();
    let tau = problem.tau();
    ws.load_density(problem, x, level);
    let rho = std::mem::take(&mut ws.rho);
    let v_now = tree_velocities_at(layout, x, level);
    ws.rhs(problem, &rho, v_now, out_rho, out_v);
    ws.rho = rho;
    let v_next = tree_velocities_at(layout, x, level + 1);
    for i in 0..layout.free_nodes {
        let next = free_density(problem, x, level + 1, i);
        let now = free_density(problem, x, level, i);
        out_rho[i] = next - now - tau * out_rho[i];
    }
    for f in 0..layout.free_nodes {
        out_v[f] = v_next[f] - v_now[f] - tau * out_v[f];
    }
}

/// Full residual `F(x)` of length `2 M (N-1)`.
pub fn assemble_residual(problem: &TransportProblem, x: &SolverState) -> Result<Vec<f64>> {
    let layout = problem.layout();
    check_len(layout.len(), x.len())?;
    let mut out = vec![0.0; layout.len()];
    residual_into(problem, x.as_slice(), &mut out);
    Ok(out)
}

pub(crate) fn residual_into(problem: &TransportProblem, x: &[f64], out: &mut [f64]) {
    let layout = problem.layout();
    let n1 = layout.free_nodes;
    let mut ws = Workspace::new(problem);
    let (rho_part, v_part) = out.split_at_mut(layout.steps * n1);
    for (level, (r, v)) in rho_part
        .chunks_mut(n1)
        .zip(v_part.chunks_mut(n1))
        .enumerate()
    {
        level_residual(problem, x, level, &mut ws, r, v);
    }
}

/// Appends the eliminated density `rho_N = 1 - sum_{i<N} rho_i`.
pub fn recover_last_density(partial: &[f64]) -> Vec<f64> {
    let mut full = partial.to_vec();
    full.push(1.0 - partial.iter().sum::<f64>());
    full
}

/// Expands a packed state into a full trajectory.
pub fn unpack(problem: &TransportProblem, x: &SolverState) -> Result<Trajectory> {
    let layout = problem.layout();
    check_len(layout.len(), x.len())?;
    let m = layout.steps;
    let mut ws = Workspace::new(problem);
    let mut densities = Vec::with_capacity(m + 1);
    let mut tree_velocities = Vec::with_capacity(m + 1);
    let mut edge_velocities = Vec::with_capacity(m + 1);
    for level in 0..=m {
        ws.load_density(problem, x.as_slice(), level);
        densities.push(ws.rho.clone());
        let vt = tree_velocities_at(layout, x.as_slice(), level).to_vec();
        edge_velocities.push(problem.tree().expand_velocities(&vt)?);
        tree_velocities.push(vt);
    }
    Ok(Trajectory {
        times: (0..=m).map(|k| k as f64 / m as f64).collect(),
        densities,
        tree_velocities,
        edge_velocities,
    })
}

/// Packs the interior densities and tree velocities of a trajectory.
pub fn pack(problem: &TransportProblem, trajectory: &Trajectory) -> Result<SolverState> {
    let layout = problem.layout();
    check_len(layout.steps + 1, trajectory.densities.len())?;
    check_len(layout.steps + 1, trajectory.tree_velocities.len())?;
    let mut x = Vec::with_capacity(layout.len());
    for row in &trajectory.densities[1..layout.steps] {
        check_len(layout.free_nodes + 1, row.len())?;
        x.extend_from_slice(&row[..layout.free_nodes]);
    }
    for row in &trajectory.tree_velocities {
        check_len(layout.free_nodes, row.len())?;
        x.extend_from_slice(row);
    }
    Ok(SolverState(x))
}

/// One explicit density step `rho - tau div(rho v)`, evaluated in split
/// form `rho_i (1 - tau sum sqrt(w) v+) + tau sum sqrt(w) v- rho_j` for the
/// upwind model so that a nonnegative CFL margin gives a nonnegative result
/// in floating point as well.
pub fn explicit_density_update(
    graph: &WeightedGraph,
    rho: &[f64],
    v_edges: &[f64],
    tau: f64,
    model: MobilityModel,
) -> Result<Vec<f64>> {
    check_len(graph.node_count(), rho.len())?;
    check_len(graph.edge_count(), v_edges.len())?;
    match model {
        MobilityModel::ArithmeticMean => {
            let div = divergence(graph, rho, v_edges, model)?;
            Ok(rho.iter().zip(div).map(|(r, d)| r - tau * d).collect())
        }
        MobilityModel::Upwind => {
            let margins = crate::newton::cfl_margins(graph, v_edges, tau);
            let mut inflow = vec![0.0; graph.node_count()];
            for (e, &v) in graph.edges().iter().zip(v_edges) {
                // v_{a,b} < 0 moves mass from b into a, and vice versa
                if v < 0.0 {
                    inflow[e.a] += e.sqrt_weight * (-v) * rho[e.b];
                } else if v > 0.0 {
                    inflow[e.b] += e.sqrt_weight * v * rho[e.a];
                }
            }
            Ok(rho
                .iter()
                .zip(margins)
                .zip(inflow)
                .map(|((r, m), inn)| r * m + tau * inn)
                .collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_with_chord, dumbbell};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const MEAN: MobilityModel = MobilityModel::ArithmeticMean;

    fn two_node(mu: [f64; 2], nu: [f64; 2], steps: usize) -> TransportProblem {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        TransportProblem::with_kruskal_tree(g, MEAN, mu.to_vec(), nu.to_vec(), steps).unwrap()
    }

    #[test]
    fn problem_validation() {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        let bad_mass = TransportProblem::with_kruskal_tree(g.clone(), MEAN, vec![0.5, 0.6], vec![0.5, 0.5], 4);
        assert!(matches!(bad_mass, Err(Error::InvalidDensity(_))));
        let zero = TransportProblem::with_kruskal_tree(g.clone(), MEAN, vec![1.0, 0.0], vec![0.5, 0.5], 4);
        assert!(matches!(zero, Err(Error::InvalidDensity(_))));
        let upwind = TransportProblem::with_kruskal_tree(
            g.clone(),
            MobilityModel::Upwind,
            vec![1.0, 0.0],
            vec![0.5, 0.5],
            4,
        );
        assert!(upwind.is_ok());
        let other_tree = SpanningTree::kruskal(&cycle_with_chord());
        assert!(TransportProblem::new(g, other_tree, MEAN, vec![0.5; 2], vec![0.5; 2], 4).is_err());
    }

    #[test]
    fn divergence_examples() {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        let div = divergence(&g, &[0.5, 0.5], &[1.0], MEAN).unwrap();
        assert_eq!(div, vec![0.5, -0.5]);
        assert_eq!(divergence(&g, &[0.5, 0.5], &[0.0], MEAN).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            divergence(&g, &[0.5, 0.5], &[0.0, 1.0], MEAN),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn hamiltonian_examples() {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        assert_eq!(hamiltonian(&g, &[0.5, 0.5], &[0.0], MEAN).unwrap(), 0.0);
        assert_eq!(hamiltonian(&g, &[0.5, 0.5], &[1.0], MEAN).unwrap(), 0.25);
        assert_eq!(hamiltonian(&g, &[0.5, 0.5], &[2.0], MEAN).unwrap(), 1.0);
        assert!(hamiltonian(&g, &[1.1, -0.1], &[2.0], MEAN).is_err());
    }

    #[test]
    fn reduced_rhs_examples() {
        let p = two_node([0.6, 0.4], [0.4, 0.6], 4);
        let (drho, dv) = reduced_rhs(&p, &[0.6, 0.4], &[1.0]).unwrap();
        assert_eq!(drho, vec![-0.5]);
        assert_eq!(dv, vec![0.0]);
        let (drho, dv) = reduced_rhs(&p, &[0.6, 0.4], &[0.0]).unwrap();
        assert_eq!((drho, dv), (vec![0.0], vec![0.0]));

        // uniform density on the 4-cycle with a rotating flow: every node sees
        // the same two squared velocities, so the bracket cancels
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (1, 4, 1.0)])
            .unwrap();
        let p = TransportProblem::with_kruskal_tree(g, MEAN, vec![0.25; 4], vec![0.25; 4], 4).unwrap();
        let (_, dv) = reduced_rhs(&p, &[0.25; 4], &[0.3, 0.3, 0.3]).unwrap();
        // tree (1,2),(1,4),(2,3): v_{3,4} = S_4 - S_3 = 0.3 - 0.6 = -0.3, so
        // |v| = 0.3 on every edge
        assert!(dv.iter().all(|d| d.abs() < 1e-15), "{dv:?}");
    }

    #[test]
    fn stationary_point_has_zero_residual() {
        let g = cycle_with_chord();
        let mu = vec![0.1, 0.2, 0.3, 0.25, 0.15];
        let p = TransportProblem::with_kruskal_tree(g, MEAN, mu.clone(), mu.clone(), 6).unwrap();
        let layout = p.layout();
        let mut x = SolverState::zeros(layout);
        for k in 1..6 {
            for i in 0..4 {
                x.0[layout.density(k, i)] = mu[i];
            }
        }
        let f = assemble_residual(&p, &x).unwrap();
        assert!(f.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn two_node_single_step_hand_solve() {
        // 2 equations, unknowns (v^0, v^1): F_rho = nu1 - mu1 + tau v^0 / 2
        let p = two_node([0.6, 0.4], [0.4, 0.6], 1);
        assert_eq!(p.layout().len(), 2);
        let x = SolverState(vec![0.4, 0.4]);
        let f = assemble_residual(&p, &x).unwrap();
        assert!(f[0].abs() < 1e-15, "{f:?}");
        assert_eq!(f[1], 0.0);
    }

    #[test]
    fn recover_last_density_examples() {
        assert_eq!(recover_last_density(&[0.25, 0.25, 0.25]), vec![0.25; 4]);
        let r = recover_last_density(&[0.6, 0.5]);
        assert_relative_eq!(r[2], -0.1, epsilon = 1e-15);
        assert_eq!(recover_last_density(&[1.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn unpack_zero_state() {
        let p = two_node([0.6, 0.4], [0.4, 0.6], 3);
        let traj = unpack(&p, &SolverState::zeros(p.layout())).unwrap();
        assert_eq!(traj.densities[0], vec![0.6, 0.4]);
        assert_eq!(traj.densities[3], vec![0.4, 0.6]);
        assert!(traj.edge_velocities.iter().flatten().all(|&v| v == 0.0));
        assert_eq!(traj.times, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn upwind_explicit_update_matches_residual_form() {
        let g = dumbbell(3, 3).unwrap();
        let rho = vec![0.1, 0.2, 0.15, 0.05, 0.3, 0.2];
        let v: Vec<f64> = (0..g.edge_count()).map(|k| ((k * 7) % 5) as f64 * 0.3 - 0.6).collect();
        let tau = 0.05;
        let split = explicit_density_update(&g, &rho, &v, tau, MobilityModel::Upwind).unwrap();
        let div = divergence(&g, &rho, &v, MobilityModel::Upwind).unwrap();
        for i in 0..6 {
            assert_relative_eq!(split[i], rho[i] - tau * div[i], epsilon = 1e-15);
        }
    }

    fn random_problem(seed: &[f64]) -> TransportProblem {
        let g = dumbbell(3, 3).unwrap();
        let raw: Vec<f64> = (0..6).map(|i| 0.1 + seed[i]).collect();
        let s: f64 = raw.iter().sum();
        let mu: Vec<f64> = raw.iter().map(|r| r / s).collect();
        let nu = vec![1.0 / 6.0; 6];
        TransportProblem::with_kruskal_tree(g, MEAN, mu, nu, 4).unwrap()
    }

    proptest! {
        #[test]
        fn pack_unpack_round_trip(seed in proptest::collection::vec(0.0f64..1.0, 6),
                                  x in proptest::collection::vec(-1.0f64..1.0, 40)) {
            let p = random_problem(&seed);
            prop_assert_eq!(p.layout().len(), 40);
            let state = SolverState(x);
            let traj = unpack(&p, &state).unwrap();
            prop_assert_eq!(pack(&p, &traj).unwrap(), state);
            prop_assert!(traj.max_mass_defect() < 1e-12);
            for (row, vt) in traj.edge_velocities.iter().zip(&traj.tree_velocities) {
                prop_assert_eq!(row, &p.tree().expand_velocities(vt).unwrap());
            }
        }

        #[test]
        fn divergence_sums_to_zero(rho in proptest::collection::vec(0.0f64..1.0, 5),
                                   v in proptest::collection::vec(-10.0f64..10.0, 6),
                                   upwind in any::<bool>()) {
            let g = cycle_with_chord();
            let model = if upwind { MobilityModel::Upwind } else { MEAN };
            let div = divergence(&g, &rho, &v, model).unwrap();
            let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>() + 1.0;
            prop_assert!(div.iter().sum::<f64>().abs() <= 1e-14 * scale);
        }

        #[test]
        fn residual_telescopes_with_eliminated_node(seed in proptest::collection::vec(0.0f64..1.0, 6),
                                                    x in proptest::collection::vec(-1.0f64..1.0, 40)) {
            // the omitted N-th density equation equals minus the sum of the
            // others, because the flux divergence sums to zero
            let p = random_problem(&seed);
            let state = SolverState(x);
            let f = assemble_residual(&p, &state).unwrap();
            let traj = unpack(&p, &state).unwrap();
            let layout = p.layout();
            for k in 0..layout.steps {
                let div = divergence(p.graph(), &traj.densities[k], &traj.edge_velocities[k], MEAN).unwrap();
                let last = traj.densities[k + 1][5] - traj.densities[k][5] + p.tau() * div[5];
                let others: f64 = (0..5).map(|i| f[layout.density_equation(k, i)]).sum();
                prop_assert!((last + others).abs() < 1e-12);
            }
        }
    }
}

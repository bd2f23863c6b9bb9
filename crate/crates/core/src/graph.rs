//! Finite connected weighted simple graphs and the benchmark graph families.
//!
//! Nodes are stored 0-based. Every public constructor that takes node
//! indices from the outside world (edge lists, files, CLI) expects them
//! 1-based and converts on entry.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};

/// Undirected edge stored canonically with `a < b` (0-based).
///
/// The velocity carried by an edge is always `v_{a,b}`, i.e. oriented from
/// the lower to the higher node index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    pub sqrt_weight: f64,
}

impl Edge {
    fn new(a: usize, b: usize, weight: f64) -> Self {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Self {
            a,
            b,
            weight,
            sqrt_weight: weight.sqrt(),
        }
    }

    /// +1 if `node` is the tail (`a`) of the canonical orientation, -1 if it
    /// is the head. Panics if the node is not an endpoint.
    #[inline]
    pub fn sign_at(&self, node: usize) -> f64 {
        if node == self.a {
            1.0
        } else {
            debug_assert_eq!(node, self.b);
            -1.0
        }
    }

    #[inline]
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Connected, simple, undirected graph with symmetric positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    /// `adjacency[i]` lists `(neighbor, edge index)` sorted by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    lookup: HashMap<(usize, usize), usize>,
}

impl WeightedGraph {
    /// Builds a graph from 1-based `(i, j, weight)` entries. The node count
    /// is the largest index mentioned.
    pub fn from_edge_list(entries: &[(usize, usize, f64)]) -> Result<Self> {
        let n = entries.iter().map(|&(i, j, _)| i.max(j)).max().unwrap_or(0);
        Self::with_node_count(n, entries)
    }

    /// Builds a graph on nodes `1..=node_count` from 1-based entries.
    ///
    /// Repeated pairs (in either orientation) are merged when their weights
    /// agree exactly.
    pub fn with_node_count(node_count: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::TooFewNodes {
                min: 2,
                got: node_count,
            });
        }
        let mut canonical: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in entries {
            for node in [i, j] {
                if node == 0 || node > node_count {
                    return Err(Error::NodeOutOfRange {
                        node,
                        count: node_count,
                    });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonpositiveWeight { i, j, weight: w });
            }
            let key = (i.min(j) - 1, i.max(j) - 1);
            if let Some(&prev) = canonical.get(&key) {
                if prev != w {
                    return Err(Error::DuplicateEdgeConflict {
                        i: key.0 + 1,
                        j: key.1 + 1,
                        first: prev,
                        second: w,
                    });
                }
            } else {
                canonical.insert(key, w);
            }
        }
        let edges: Vec<Edge> = canonical
            .into_iter()
            .map(|((a, b), w)| Edge::new(a, b, w))
            .collect();
        Self::from_canonical(node_count, edges)
    }

    fn from_canonical(node_count: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        let mut lookup = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
            lookup.insert((e.a, e.b), k);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = Self {
            node_count,
            edges,
            adjacency,
            lookup,
        };
        let components = graph.component_count();
        if components != 1 {
            return Err(Error::DisconnectedGraph { components });
        }
        Ok(graph)
    }

    fn component_count(&self) -> usize {
        let mut seen = vec![false; self.node_count];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(w, _) in &self.adjacency[u] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, k: usize) -> &Edge {
        &self.edges[k]
    }

    /// `(neighbor, edge index)` pairs of node `i` (0-based).
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Index of the edge joining `i` and `j` (0-based, any order).
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.lookup.get(&(i.min(j), i.max(j))).copied()
    }

    /// Weight of `(i, j)` (0-based); zero when the pair is not an edge.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.edge_index(i, j).map_or(0.0, |k| self.edges[k].weight)
    }

    /// Canonical 1-based `(i, j, weight)` triples.
    pub fn to_edge_list(&self) -> Vec<(usize, usize, f64)> {
        self.edges
            .iter()
            .map(|e| (e.a + 1, e.b + 1, e.weight))
            .collect()
    }
}

/// Periodic 1D lattice: a cycle graph together with its node coordinates
/// `x_i = origin + i * spacing`.
#[derive(Debug, Clone)]
pub struct Lattice1d {
    pub graph: WeightedGraph,
    pub origin: f64,
    pub spacing: f64,
}

impl Lattice1d {
    /// Uniform periodic lattice on `[x_lo, x_hi)` with `grid_points` nodes
    /// and weights `1/dx^2`.
    pub fn new(grid_points: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        let graph = lattice_1d_periodic(grid_points, x_hi - x_lo)?;
        Ok(Self {
            graph,
            origin: x_lo,
            spacing: (x_hi - x_lo) / grid_points as f64,
        })
    }

    /// Interprets an existing graph as a periodic lattice over `[x_lo, x_hi)`.
    /// The graph must be the cycle `1-2-...-N-1` with uniform weights.
    pub fn from_graph(graph: WeightedGraph, x_lo: f64, x_hi: f64) -> Result<Self> {
        let n = graph.node_count();
        if n < 3 || graph.edge_count() != n {
            return Err(Error::NotA1DLattice);
        }
        let w0 = graph.edge(0).weight;
        for i in 0..n {
            let j = (i + 1) % n;
            match graph.edge_index(i, j) {
                Some(k) if graph.edge(k).weight == w0 => {}
                _ => return Err(Error::NotA1DLattice),
            }
        }
        Ok(Self {
            graph,
            origin: x_lo,
            spacing: (x_hi - x_lo) / n as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.graph.node_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.coordinate(i)).collect()
    }

    /// Domain length `N * dx`.
    pub fn period(&self) -> f64 {
        self.spacing * self.len() as f64
    }
}

/// Periodic square 2D lattice. Node `(ix, iy)` has index `iy * n + ix`.
#[derive(Debug, Clone)]
pub struct Lattice2d {
    pub graph: WeightedGraph,
    pub side: usize,
    pub origin: f64,
    pub spacing: f64,
}

impl Lattice2d {
    pub fn new(side: usize, lo: f64, hi: f64) -> Result<Self> {
        let graph = lattice_2d_periodic(side, side, hi - lo)?;
        Ok(Self {
            graph,
            side,
            origin: lo,
            spacing: (hi - lo) / side as f64,
        })
    }

    /// Interprets an existing graph as a `side x side` torus over `[lo, hi)^2`.
    pub fn from_graph(graph: WeightedGraph, lo: f64, hi: f64) -> Result<Self> {
        let n = graph.node_count();
        let side = (n as f64).sqrt().round() as usize;
        if side < 3 || side * side != n || graph.edge_count() != 2 * n {
            return Err(Error::NotA2DLattice);
        }
        for iy in 0..side {
            for ix in 0..side {
                let k = iy * side + ix;
                let right = iy * side + (ix + 1) % side;
                let up = ((iy + 1) % side) * side + ix;
                if graph.edge_index(k, right).is_none() || graph.edge_index(k, up).is_none() {
                    return Err(Error::NotA2DLattice);
                }
            }
        }
        Ok(Self {
            graph,
            side,
            origin: lo,
            spacing: (hi - lo) / side as f64,
        })
    }

    pub fn coordinate(&self, k: usize) -> (f64, f64) {
        let (ix, iy) = (k % self.side, k / self.side);
        (
            self.origin + ix as f64 * self.spacing,
            self.origin + iy as f64 * self.spacing,
        )
    }
}

/// Cycle on `grid_points` nodes with every weight `1/dx^2`,
/// `dx = domain_length / grid_points`.
pub fn lattice_1d_periodic(grid_points: usize, domain_length: f64) -> Result<WeightedGraph> {
    if grid_points < 3 {
        return Err(Error::TooFewNodes {
            min: 3,
            got: grid_points,
        });
    }
    if !(domain_length > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "domain length must be positive, got {domain_length}"
        )));
    }
    let dx = domain_length / grid_points as f64;
    let w = 1.0 / (dx * dx);
    let edges: Vec<Edge> = (0..grid_points)
        .map(|i| Edge::new(i, (i + 1) % grid_points, w))
        .collect();
    let edges = sorted(edges);
    WeightedGraph::from_canonical(grid_points, edges)
}

/// Torus grid `nx x ny` with uniform weight `1/dx^2`, `dx = side_length/nx`.
pub fn lattice_2d_periodic(nx: usize, ny: usize, side_length: f64) -> Result<WeightedGraph> {
    let smallest = nx.min(ny);
    if smallest < 3 {
        return Err(Error::TooFewNodes {
            min: 3,
            got: smallest,
        });
    }
    if nx != ny {
        return Err(Error::NonSquareGrid { nx, ny });
    }
    if !(side_length > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "side length must be positive, got {side_length}"
        )));
    }
    let dx = side_length / nx as f64;
    let w = 1.0 / (dx * dx);
    let mut edges = Vec::with_capacity(2 * nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let k = iy * nx + ix;
            edges.push(Edge::new(k, iy * nx + (ix + 1) % nx, w));
            edges.push(Edge::new(k, ((iy + 1) % ny) * nx + ix, w));
        }
    }
    WeightedGraph::from_canonical(nx * ny, sorted(edges))
}

/// Two complete clusters of sizes `left_size` and `right_size` joined by the
/// single bridge between the last left node and the first right node.
/// All weights are 1.
pub fn dumbbell(left_size: usize, right_size: usize) -> Result<WeightedGraph> {
    let smallest = left_size.min(right_size);
    if smallest < 2 {
        return Err(Error::TooFewNodes {
            min: 2,
            got: smallest,
        });
    }
    let mut entries = Vec::new();
    for i in 1..=left_size {
        for j in i + 1..=left_size {
            entries.push((i, j, 1.0));
        }
    }
    for i in left_size + 1..=left_size + right_size {
        for j in i + 1..=left_size + right_size {
            entries.push((i, j, 1.0));
        }
    }
    entries.push((left_size, left_size + 1, 1.0));
    WeightedGraph::with_node_count(left_size + right_size, &entries)
}

/// `K_N` with unit weights.
pub fn complete_graph(node_count: usize) -> Result<WeightedGraph> {
    if node_count < 2 {
        return Err(Error::TooFewNodes {
            min: 2,
            got: node_count,
        });
    }
    let mut entries = Vec::with_capacity(node_count * (node_count - 1) / 2);
    for i in 1..=node_count {
        for j in i + 1..=node_count {
            entries.push((i, j, 1.0));
        }
    }
    WeightedGraph::with_node_count(node_count, &entries)
}

/// The five-node cycle `1-2-3-4-5-1` with the chord `(1,3)`, unit weights.
pub fn cycle_with_chord() -> WeightedGraph {
    WeightedGraph::from_edge_list(&[
        (1, 2, 1.0),
        (2, 3, 1.0),
        (3, 4, 1.0),
        (4, 5, 1.0),
        (1, 5, 1.0),
        (1, 3, 1.0),
    ])
    .expect("static graph is valid")
}

fn sorted(mut edges: Vec<Edge>) -> Vec<Edge> {
    edges.sort_by_key(|e| (e.a, e.b));
    edges
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_graphs() {
        let g = WeightedGraph::from_edge_list(&[(1, 2, 1.0)]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));

        let tri = WeightedGraph::from_edge_list(&[(1, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0)]).unwrap();
        assert!((0..3).all(|i| tri.degree(i) == 2));

        let g = cycle_with_chord();
        assert_eq!((g.node_count(), g.edge_count()), (5, 6));
        assert!(g.edge_index(0, 2).is_some());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(1, 2, 1.0), (3, 4, 1.0)]),
            Err(Error::DisconnectedGraph { components: 2 })
        ));
        assert_eq!(
            WeightedGraph::from_edge_list(&[(1, 1, 1.0), (1, 2, 1.0)]),
            Err(Error::SelfLoop(1))
        );
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(1, 2, 1.0), (2, 1, 2.0)]),
            Err(Error::DuplicateEdgeConflict { i: 1, j: 2, .. })
        ));
        assert!(matches!(
            WeightedGraph::from_edge_list(&[(1, 2, 0.0)]),
            Err(Error::NonpositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::with_node_count(2, &[(1, 3, 1.0)]),
            Err(Error::NodeOutOfRange { node: 3, count: 2 })
        ));
        // (i,j)/(j,i) with the same weight merge
        let g = WeightedGraph::from_edge_list(&[(1, 2, 0.5), (2, 1, 0.5)]).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn lattice_1d_weights() {
        let g = lattice_1d_periodic(64, 4.0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (64, 64));
        assert_eq!(g.edge(0).weight, 256.0);

        let g = lattice_1d_periodic(128, 1.0).unwrap();
        assert_eq!(g.edge(0).weight, 128.0 * 128.0);

        let g = lattice_1d_periodic(3, 3.0).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges().iter().all(|e| e.weight == 1.0));

        assert!(matches!(
            lattice_1d_periodic(2, 1.0),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn lattice_2d_shapes() {
        let g = lattice_2d_periodic(64, 64, 4.0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (4096, 8192));
        assert_eq!(g.edge(0).weight, 256.0);

        let g = lattice_2d_periodic(3, 3, 3.0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (9, 18));
        assert!(g.edges().iter().all(|e| e.weight == 1.0));

        let g = lattice_2d_periodic(4, 4, 4.0).unwrap();
        assert!((0..16).all(|i| g.degree(i) == 4));

        assert!(matches!(
            lattice_2d_periodic(4, 5, 4.0),
            Err(Error::NonSquareGrid { nx: 4, ny: 5 })
        ));
        assert!(matches!(
            lattice_2d_periodic(2, 2, 4.0),
            Err(Error::TooFewNodes { .. })
        ));
    }

    #[test]
    fn dumbbell_shapes() {
        let g = dumbbell(4, 4).unwrap();
        assert_eq!(g.node_count(), 8);
        assert!(g.edge_index(3, 4).is_some());
        assert_eq!(g.edge_count(), 6 + 6 + 1);

        let g = dumbbell(2, 2).unwrap();
        let edges: Vec<_> = g.to_edge_list().iter().map(|&(i, j, _)| (i, j)).collect();
        assert_eq!(edges, vec![(1, 2), (2, 3), (3, 4)]);

        let g = dumbbell(3, 3).unwrap();
        let crossing = g.edges().iter().filter(|e| e.a < 3 && e.b >= 3).count();
        assert_eq!(crossing, 1);

        assert!(dumbbell(1, 3).is_err());
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(complete_graph(2).unwrap().edge_count(), 1);
        assert_eq!(complete_graph(5).unwrap().edge_count(), 10);
        let k10 = complete_graph(10).unwrap();
        assert_eq!(k10.edge_count(), 45);
        assert!((0..10).all(|i| k10.degree(i) == 9));
        assert!(complete_graph(1).is_err());
    }

    #[test]
    fn lattice_views() {
        let lat = Lattice1d::new(8, 0.0, 1.0).unwrap();
        assert_eq!(lat.coordinate(4), 0.5);
        let back = Lattice1d::from_graph(lat.graph.clone(), 0.0, 1.0).unwrap();
        assert_eq!(back.spacing, 0.125);
        assert!(matches!(
            Lattice1d::from_graph(complete_graph(4).unwrap(), 0.0, 1.0),
            Err(Error::NotA1DLattice)
        ));

        let sq = Lattice2d::new(4, -1.0, 3.0).unwrap();
        assert_eq!(sq.coordinate(5), (0.0, 0.0));
        assert!(Lattice2d::from_graph(sq.graph.clone(), -1.0, 3.0).is_ok());
        assert!(matches!(
            Lattice2d::from_graph(lattice_1d_periodic(9, 1.0).unwrap(), 0.0, 1.0),
            Err(Error::NotA2DLattice)
        ));
    }
}

//! Spanning-tree gauge fixing.
//!
//! Potential-induced edge velocities `v_{i,j} = (S_j - S_i) sqrt(w_ij)` are
//! determined by their values on any spanning tree: every edge's scaled
//! velocity `v_e / sqrt(w_e)` is the signed sum of scaled tree velocities
//! along the unique tree path joining its endpoints.

use petgraph::unionfind::UnionFind;

use crate::error::{check_len, Error, Result};
use crate::graph::{Edge, WeightedGraph};

/// Oriented spanning tree of a [`WeightedGraph`] with precomputed path
/// coefficients for every graph edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    node_count: usize,
    /// Graph edges, kept to check the tree is used with its own graph.
    graph_edges: Vec<Edge>,
    /// Graph edge index of each tree edge, in tree order.
    tree_edges: Vec<usize>,
    /// Rooted at node 0: `(parent, tree edge index)`; `None` for the root.
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    /// Per graph edge: sparse `(tree edge, a_f)` with `a_f = +-1`.
    coefficients: Vec<Vec<(usize, i8)>>,
    /// Per graph edge: `(tree edge, a_f sqrt(w_e) / sqrt(w_f))`.
    expansion: Vec<Vec<(usize, f64)>>,
}

impl SpanningTree {
    /// Kruskal's algorithm with edges taken in ascending
    /// `(weight, min node, max node)` order.
    pub fn kruskal(graph: &WeightedGraph) -> Self {
        let mut order: Vec<usize> = (0..graph.edge_count()).collect();
        order.sort_by(|&x, &y| {
            let (ex, ey) = (graph.edge(x), graph.edge(y));
            ex.weight
                .total_cmp(&ey.weight)
                .then(ex.a.cmp(&ey.a))
                .then(ex.b.cmp(&ey.b))
        });
        let mut components = UnionFind::<usize>::new(graph.node_count());
        let mut chosen = Vec::with_capacity(graph.node_count() - 1);
        for k in order {
            let e = graph.edge(k);
            if components.union(e.a, e.b) {
                chosen.push(k);
                if chosen.len() + 1 == graph.node_count() {
                    break;
                }
            }
        }
        Self::build(graph, chosen).expect("kruskal on a connected graph yields a spanning tree")
    }

    /// Tree from explicit 1-based node pairs, in the given order.
    pub fn from_node_pairs(graph: &WeightedGraph, pairs: &[(usize, usize)]) -> Result<Self> {
        let n = graph.node_count();
        let mut chosen = Vec::with_capacity(pairs.len());
        for &(i, j) in pairs {
            for node in [i, j] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, count: n });
                }
            }
            let k = graph
                .edge_index(i - 1, j - 1)
                .ok_or(Error::EdgeNotInGraph(i, j))?;
            chosen.push(k);
        }
        Self::build(graph, chosen)
    }

    fn build(graph: &WeightedGraph, tree_edges: Vec<usize>) -> Result<Self> {
        let n = graph.node_count();
        if tree_edges.len() + 1 != n {
            return Err(Error::NotASpanningTree(format!(
                "expected {} edges, got {}",
                n - 1,
                tree_edges.len()
            )));
        }
        let mut uf = UnionFind::<usize>::new(n);
        for &k in &tree_edges {
            let e = graph.edge(k);
            if !uf.union(e.a, e.b) {
                return Err(Error::NotASpanningTree(format!(
                    "edge ({},{}) closes a cycle",
                    e.a + 1,
                    e.b + 1
                )));
            }
        }

        // adjacency restricted to the tree, then BFS from node 0
        let mut tree_adj = vec![Vec::new(); n];
        for (t, &k) in tree_edges.iter().enumerate() {
            let e = graph.edge(k);
            tree_adj[e.a].push((e.b, t));
            tree_adj[e.b].push((e.a, t));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![0; n];
        let mut visited = vec![false; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(w, t) in &tree_adj[u] {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some((u, t));
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }

        let mut tree = Self {
            node_count: n,
            graph_edges: graph.edges().to_vec(),
            tree_edges,
            parent,
            depth,
            coefficients: Vec::new(),
            expansion: Vec::new(),
        };
        tree.coefficients = graph
            .edges()
            .iter()
            .map(|e| tree.path_coefficients(e.a, e.b))
            .collect();
        tree.expansion = graph
            .edges()
            .iter()
            .zip(&tree.coefficients)
            .map(|(e, coeffs)| {
                coeffs
                    .iter()
                    .map(|&(t, a)| {
                        let f = graph.edge(tree.tree_edges[t]);
                        (t, a as f64 * e.sqrt_weight / f.sqrt_weight)
                    })
                    .collect()
            })
            .collect();
        Ok(tree)
    }

    /// Coefficients expressing `S_to - S_from` through tree differences
    /// `S_high - S_low` of the tree edges on the path.
    fn path_coefficients(&self, from: usize, to: usize) -> Vec<(usize, i8)> {
        let mut up_from = Vec::new();
        let mut up_to = Vec::new();
        let (mut x, mut y) = (from, to);
        while self.depth[x] > self.depth[y] {
            up_from.push(self.step_up(x));
            x = self.parent[x].unwrap().0;
        }
        while self.depth[y] > self.depth[x] {
            up_to.push(self.step_up(y));
            y = self.parent[y].unwrap().0;
        }
        while x != y {
            up_from.push(self.step_up(x));
            up_to.push(self.step_up(y));
            x = self.parent[x].unwrap().0;
            y = self.parent[y].unwrap().0;
        }
        // S_to - S_from = sum_{to side} sigma - sum_{from side} sigma, where
        // sigma = +1 when the child is the high end of the tree edge.
        let mut out: Vec<(usize, i8)> = up_to
            .into_iter()
            .chain(up_from.into_iter().map(|(t, s)| (t, -s)))
            .collect();
        out.sort_unstable_by_key(|&(t, _)| t);
        out
    }

    /// Tree edge from `child` to its parent, with the sign of
    /// `S_child - S_parent` relative to the low-to-high orientation.
    fn step_up(&self, child: usize) -> (usize, i8) {
        let (p, t) = self.parent[child].expect("root has no parent");
        let sign = if child > p { 1 } else { -1 };
        (t, sign)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of tree edges, `N - 1`.
    pub fn len(&self) -> usize {
        self.tree_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree_edges.is_empty()
    }

    /// Graph edge indices of the tree edges, in tree order.
    pub fn edge_indices(&self) -> &[usize] {
        &self.tree_edges
    }

    /// Tree edges as canonical graph edges, in tree order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.tree_edges.iter().map(|&k| &self.graph_edges[k])
    }

    /// Tree edges as 1-based `(low, high)` pairs.
    pub fn node_pairs(&self) -> Vec<(usize, usize)> {
        self.edges().map(|e| (e.a + 1, e.b + 1)).collect()
    }

    /// Parent of each node in the tree rooted at node 0.
    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node].map(|(p, _)| p)
    }

    pub fn matches_graph(&self, graph: &WeightedGraph) -> bool {
        self.graph_edges == graph.edges()
    }

    /// Signed coefficients `a_f` for the graph edge joining 1-based nodes
    /// `(i, j)`, expressing `(S_high - S_low)` where `low = min(i,j)`.
    pub fn tree_path_coefficients(&self, i: usize, j: usize) -> Result<Vec<(usize, i8)>> {
        let k = self
            .graph_edges
            .iter()
            .position(|e| e.a + 1 == i.min(j) && e.b + 1 == i.max(j))
            .ok_or(Error::EdgeNotInGraph(i, j))?;
        Ok(self.coefficients[k].clone())
    }

    /// Coefficient table indexed by graph edge.
    pub fn coefficient_table(&self) -> &[Vec<(usize, i8)>] {
        &self.coefficients
    }

    /// Expansion rows `(tree edge, a_f sqrt(w_e)/sqrt(w_f))` per graph edge.
    pub fn expansion_table(&self) -> &[Vec<(usize, f64)>] {
        &self.expansion
    }

    /// Velocities on every graph edge from the tree velocities:
    /// `v_e = sqrt(w_e) * sum_f a_f v_f / sqrt(w_f)`.
    pub fn expand_velocities(&self, v_tree: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), v_tree.len())?;
        let mut out = vec![0.0; self.graph_edges.len()];
        self.expand_into(v_tree, &mut out);
        Ok(out)
    }

    pub(crate) fn expand_into(&self, v_tree: &[f64], out: &mut [f64]) {
        for (slot, row) in out.iter_mut().zip(&self.expansion) {
            *slot = row.iter().map(|&(t, c)| c * v_tree[t]).sum();
        }
    }

    /// Node potential with `S_base = 0` such that each tree edge `f = (i,j)`,
    /// `i < j`, satisfies `S_j = S_i + v_f / sqrt(w_f)`. `base` is 1-based.
    pub fn recover_potential(&self, v_tree: &[f64], base: usize) -> Result<Vec<f64>> {
        check_len(self.len(), v_tree.len())?;
        if base == 0 || base > self.node_count {
            return Err(Error::NodeOutOfRange {
                node: base,
                count: self.node_count,
            });
        }
        // walk nodes in BFS (depth) order so parents are filled first
        let mut order: Vec<usize> = (0..self.node_count).collect();
        order.sort_by_key(|&u| self.depth[u]);
        let mut s = vec![0.0; self.node_count];
        for u in order {
            if let Some((p, t)) = self.parent[u] {
                let f = &self.graph_edges[self.tree_edges[t]];
                let diff = v_tree[t] / f.sqrt_weight;
                s[u] = if u > p { s[p] + diff } else { s[p] - diff };
            }
        }
        let shift = s[base - 1];
        s.iter_mut().for_each(|x| *x -= shift);
        Ok(s)
    }
}

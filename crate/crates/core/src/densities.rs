//! Endpoint density generators and seeded random inputs.
//!
//! Random draws use `ChaCha8Rng` seeded through `SeedableRng::seed_from_u64`,
//! which is portable across platforms.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Lattice1d, Lattice2d, WeightedGraph};

/// Rescales `values` to unit sum.
pub fn normalize(values: &mut [f64]) -> Result<()> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidDensity(format!("cannot normalize a vector with sum {total}")));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

/// `exp(-a (x - b)^2) + r` at the lattice nodes, normalized.
pub fn gaussian_density_1d(lattice: &Lattice1d, a: f64, b: f64, r: f64) -> Result<Vec<f64>> {
    if !(a > 0.0) || !(r >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "gaussian needs a > 0 and r >= 0 (got a = {a}, r = {r})"
        )));
    }
    let mut rho: Vec<f64> = lattice
        .coordinates()
        .into_iter()
        .map(|x| (-a * (x - b).powi(2)).exp() + r)
        .collect();
    normalize(&mut rho)?;
    Ok(rho)
}

/// Parameters of `w exp(-a (x - b)^2 - c (y - d)^2) + eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian2d {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub w: f64,
    pub eps: f64,
}

pub fn gaussian_density_2d(lattice: &Lattice2d, p: Gaussian2d) -> Result<Vec<f64>> {
    if !(p.a > 0.0 && p.c > 0.0 && p.w > 0.0 && p.eps >= 0.0) {
        return Err(Error::InvalidConfig(format!("invalid 2D gaussian parameters {p:?}")));
    }
    let mut rho: Vec<f64> = (0..lattice.graph.node_count())
        .map(|k| {
            let (x, y) = lattice.coordinate(k);
            p.w * (-p.a * (x - p.b).powi(2) - p.c * (y - p.d).powi(2)).exp() + p.eps
        })
        .collect();
    normalize(&mut rho)?;
    Ok(rho)
}

/// `1 + sin(2 pi x) / 32` and the uniform density, both normalized.
pub fn benchmark_1d_map_densities(lattice: &Lattice1d) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut mu: Vec<f64> = lattice
        .coordinates()
        .into_iter()
        .map(|x| 1.0 + (2.0 * PI * x).sin() / 32.0)
        .collect();
    normalize(&mut mu)?;
    let n = lattice.len();
    Ok((mu, vec![1.0 / n as f64; n]))
}

/// Components drawn uniformly from `[0.05, 1)` and normalized.
pub fn seeded_random_density(node_count: usize, seed: u64) -> Result<Vec<f64>> {
    if node_count < 2 {
        return Err(Error::TooFewNodes { min: 2, got: node_count });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho: Vec<f64> = (0..node_count).map(|_| rng.gen_range(0.05..1.0)).collect();
    normalize(&mut rho)?;
    Ok(rho)
}

/// Connected graph on `node_count` nodes with unit weights: a random
/// recursive tree (node `i` attaches to a uniform earlier node) plus every
/// other pair independently with probability `extra_edge_probability`.
pub fn seeded_random_connected_graph(
    node_count: usize,
    extra_edge_probability: f64,
    seed: u64,
) -> Result<WeightedGraph> {
    if node_count < 2 {
        return Err(Error::TooFewNodes { min: 2, got: node_count });
    }
    if !(0.0..=1.0).contains(&extra_edge_probability) {
        return Err(Error::InvalidConfig(format!(
            "edge probability {extra_edge_probability} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut in_tree = vec![vec![false; node_count]; node_count];
    for i in 1..node_count {
        let j = rng.gen_range(0..i);
        in_tree[j][i] = true;
        edges.push((j + 1, i + 1, 1.0));
    }
    for i in 0..node_count {
        for j in i + 1..node_count {
            if !in_tree[i][j] && rng.gen_bool(extra_edge_probability) {
                edges.push((i + 1, j + 1, 1.0));
            }
        }
    }
    WeightedGraph::with_node_count(node_count, &edges)
}

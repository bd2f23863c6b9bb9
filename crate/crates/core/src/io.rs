//! Text formats: edge lists, density vectors, tree lists and the JSON run
//! document. All node indices in files are 1-based.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::system::Trajectory;

/// Version of the JSON run document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest mass defect accepted in a density file without `normalize`.
pub const DENSITY_MASS_TOLERANCE: f64 = 1e-8;

const EDGE_HEADER: &str = "i,j,omega";

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((k + 1, line))
    })
}

fn parse_field<T: std::str::FromStr>(field: &str, line: usize, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} '{}'", field.trim()),
    })
}

/// Parses `i,j,omega` rows after the `i,j,omega` header line.
pub fn parse_edge_list(text: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, header)) if header.replace(' ', "") == EDGE_HEADER => {}
        Some((line, other)) => {
            return Err(Error::Parse {
                line,
                message: format!("expected header '{EDGE_HEADER}', found '{other}'"),
            })
        }
        None => {
            return Err(Error::Parse {
                line: 0,
                message: "empty edge list".into(),
            })
        }
    }
    lines
        .map(|(line, row)| {
            let fields: Vec<&str> = row.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", fields.len()),
                });
            }
            Ok((
                parse_field(fields[0], line, "node index")?,
                parse_field(fields[1], line, "node index")?,
                parse_field(fields[2], line, "weight")?,
            ))
        })
        .collect()
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    WeightedGraph::from_edge_list(&parse_edge_list(text)?)
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&fs::read_to_string(path)?)
}

pub fn format_edge_list(graph: &WeightedGraph) -> String {
    let mut out = format!("{EDGE_HEADER}\n");
    for (i, j, w) in graph.to_edge_list() {
        out.push_str(&format!("{i},{j},{w:?}\n"));
    }
    out
}

/// Tree edges as `i,j` or `i,j,omega` rows (weights ignored); a header
/// line is optional.
pub fn parse_tree_pairs(text: &str) -> Result<Vec<(usize, usize)>> {
    content_lines(text)
        .filter(|(_, row)| {
            let r = row.replace(' ', "");
            r != EDGE_HEADER && r != "i,j"
        })
        .map(|(line, row)| {
            let fields: Vec<&str> = row.split(',').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 or 3 fields, found {}", fields.len()),
                });
            }
            Ok((
                parse_field(fields[0], line, "node index")?,
                parse_field(fields[1], line, "node index")?,
            ))
        })
        .collect()
}

/// One value per line. With `normalize` the vector is rescaled to unit
/// mass; otherwise its mass must be within [`DENSITY_MASS_TOLERANCE`] of 1
/// and the small defect is removed by rescaling.
pub fn parse_density(text: &str, normalize: bool) -> Result<Vec<f64>> {
    let mut rho = content_lines(text)
        .map(|(line, row)| {
            let v: f64 = parse_field(row, line, "density value")?;
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("density value {v} must be finite and nonnegative"),
                });
            }
            Ok(v)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mass: f64 = rho.iter().sum();
    if !normalize && (mass - 1.0).abs() > DENSITY_MASS_TOLERANCE {
        return Err(Error::InvalidDensity(format!(
            "mass {mass} differs from 1 by more than {DENSITY_MASS_TOLERANCE:e} (use normalize)"
        )));
    }
    crate::densities::normalize(&mut rho)?;
    Ok(rho)
}

pub fn read_density(path: &Path, normalize: bool) -> Result<Vec<f64>> {
    parse_density(&fs::read_to_string(path)?, normalize)
}

pub fn format_density(rho: &[f64]) -> String {
    rho.iter().map(|v| format!("{v:?}\n")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    /// `(i, j, omega)` with 1-based `i < j`.
    pub edge_list: Vec<(usize, usize, f64)>,
    /// Tree edges as 1-based pairs, in tree order.
    pub tree: Vec<(usize, usize)>,
}

/// Solver outcome and distance estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub positivity_ok: bool,
    pub cfl_margin: f64,
    pub w2_action: f64,
    pub w2_initial: f64,
    pub w2: f64,
    pub min_rcond: Option<f64>,
    pub hamiltonian_drift: f64,
    pub max_mass_defect: f64,
    pub wall_time_seconds: f64,
}

/// The JSON document written by every scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDocument {
    pub schema_version: u32,
    pub scenario: String,
    /// Fully resolved configuration.
    pub config: serde_json::Value,
    pub graph: Option<GraphSummary>,
    pub solve: Option<SolveSummary>,
    pub trajectory: Option<Trajectory>,
    /// Scenario-specific results.
    pub extras: serde_json::Value,
}

pub fn to_json(document: &RunDocument) -> Result<String> {
    serde_json::to_string_pretty(document).map_err(|e| Error::Io(e.to_string()))
}

pub fn from_json(text: &str) -> Result<RunDocument> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

pub fn write_document(path: &Path, document: &RunDocument) -> Result<()> {
    fs::write(path, to_json(document)?)?;
    Ok(())
}

pub fn read_document(path: &Path) -> Result<RunDocument> {
    from_json(&fs::read_to_string(path)?)
}

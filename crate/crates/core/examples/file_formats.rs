//! Edge-list and density files in, JSON run document out, through the same
//! scenario runner the `graph-ot` binary uses.

use graph_ot::graph::dumbbell;
use graph_ot::io::{format_density, format_edge_list, read_document};
use graph_ot::scenario::{run_scenario, DensitySource, GraphSource, Scenario, ScenarioSpec};

fn main() -> graph_ot::Result<()> {
    let dir = std::env::temp_dir().join("graph-ot-file-formats");
    std::fs::create_dir_all(&dir)?;
    let graph_path = dir.join("graph.csv");
    let mu_path = dir.join("mu.txt");
    let nu_path = dir.join("nu.txt");
    let out_path = dir.join("run.json");

    std::fs::write(&graph_path, format_edge_list(&dumbbell(3, 3)?))?;
    // unnormalized weights, rescaled by `normalize`
    std::fs::write(&mu_path, "# initial\n3\n1\n1\n1\n1\n1\n")?;
    std::fs::write(&nu_path, format_density(&[1.0 / 6.0; 6]))?;
    println!("{}", std::fs::read_to_string(&graph_path)?);

    let mut spec = ScenarioSpec::new(Scenario::Solve);
    spec.graph = Some(GraphSource::File { path: graph_path });
    spec.mu = Some(DensitySource::File { path: mu_path });
    spec.nu = Some(DensitySource::File { path: nu_path });
    spec.normalize = true;
    spec.steps = Some(16);
    spec.output = Some(out_path.clone());
    let outcome = run_scenario(&spec)?;
    println!("exit status {}", outcome.status.code());

    let doc = read_document(&out_path)?;
    let solve = doc.solve.expect("solve summary");
    println!("schema {} scenario {}", doc.schema_version, doc.scenario);
    println!("converged {} in {} iterations, W2 ~ {:.5e}", solve.converged, solve.iterations, solve.w2);
    println!("round trip exact: {}", doc.trajectory == outcome.document.trajectory);
    Ok(())
}

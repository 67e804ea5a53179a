use std::path::Path;

use netepi::{EpidemicState, Graph, ModelKind};

use crate::args::RunArgs;
use crate::error::CliError;

/// Loads an edge list or a JSON matrix and checks strong connectivity.
pub fn load_graph(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::graph(format!("{}: {e}", path.display())))?;
    let graph = if text.trim_start().starts_with('[') {
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
            .map_err(|e| CliError::graph(format!("{}: {e}", path.display())))?;
        Graph::from_rows(&rows)
    } else {
        Graph::from_edge_list(&text)
    };
    let graph = graph.map_err(|e| CliError::graph(format!("{}: {e}", path.display())))?;
    graph
        .ensure_strongly_connected()
        .map_err(|e| CliError::graph(format!("{}: {e}", path.display())))?;
    Ok(graph)
}

/// Reads a vector of `n` numbers: a JSON array, or numbers separated by
/// whitespace or commas with `#` comments.
pub fn load_vector(path: &Path, n: usize) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::config(format!("{}: {msg}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let values: Vec<f64> = if text.trim_start().starts_with('[') {
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?
    } else {
        text.lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
            .filter(|tok| !tok.is_empty())
            .map(|tok| tok.parse::<f64>().map_err(|e| bad(format!("`{tok}`: {e}"))))
            .collect::<Result<_, _>>()?
    };
    if values.len() != n {
        return Err(bad(format!("expected {n} values, found {}", values.len())));
    }
    Ok(values)
}

/// Builds the initial state from exactly one of `--x0-uniform`,
/// `--seed-node` and `--x0-file`, plus `--r0-file` for SIR.
pub fn initial_state(args: &RunArgs, n: usize, kind: ModelKind) -> Result<EpidemicState, CliError> {
    let given = [args.x0_uniform.is_some(), args.seed_node.is_some(), args.x0_file.is_some()];
    match given.iter().filter(|&&g| g).count() {
        1 => {}
        0 => return Err(CliError::config("initial state needs one of --x0-uniform, --seed-node, --x0-file")),
        _ => return Err(CliError::config("--x0-uniform, --seed-node and --x0-file are mutually exclusive")),
    }
    let x = if let Some(v) = args.x0_uniform {
        vec![v; n]
    } else if let Some(k) = args.seed_node {
        if k == 0 || k > n {
            return Err(CliError::config(format!("--seed-node {k} outside 1..={n}")));
        }
        let mut x = vec![0.0; n];
        x[k - 1] = 1.0;
        x
    } else {
        load_vector(args.x0_file.as_deref().expect("checked above"), n)?
    };
    let r = match &args.r0_file {
        Some(path) if kind == ModelKind::Sir => load_vector(path, n)?,
        Some(_) => return Err(CliError::config(format!("--r0-file only applies to SIR, not {kind}"))),
        None => vec![0.0; n],
    };
    let s = x.iter().zip(&r).map(|(x, r)| 1.0 - x - r).collect();
    Ok(EpidemicState::sir(s, x, r)?)
}

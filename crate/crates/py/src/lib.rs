//! Python bindings: generate inputs, run the spanning-tree program (or
//! any program in the textual format), and check results, all over the
//! `.host` text representation.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use graft_core::gen::{GraphClass, WeightedGraphSpec};
use graft_core::interp::{execute, load, ExecOptions, Outcome};
use graft_core::mst::{mst_boruvka_loaded, run_mst_with, validate_end_state, MST_BORUVKA_SOURCE};
use graft_core::text::{parse_host, parse_program, print_host};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Generate a weighted input graph ("grid", "fixedwheel" or "wheel") as
/// host-graph text.
#[pyfunction]
fn generate(class: &str, k: u32, seed: u64) -> PyResult<String> {
    let class: GraphClass = class.parse().map_err(value_err)?;
    let graph = WeightedGraphSpec::new(class, k, seed)
        .generate()
        .map_err(value_err)?;
    Ok(print_host(&graph))
}

/// Run the spanning-tree program on host-graph text. Returns a dict with
/// the total weight, the result graph text, and execution statistics.
#[pyfunction]
#[pyo3(signature = (host, seed=None, step_limit=None))]
fn run_mst(py: Python<'_>, host: &str, seed: Option<u64>, step_limit: Option<u64>) -> PyResult<Py<PyDict>> {
    let graph = parse_host(host).map_err(value_err)?;
    let program = mst_boruvka_loaded();
    let options = ExecOptions {
        seed,
        step_limit: step_limit.unwrap_or_else(|| ExecOptions::default().step_limit),
    };
    let result = run_mst_with(&program, &graph, &options).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("total_weight", result.total_weight)?;
    out.set_item("tree_edges", result.mst_edge_ids.len())?;
    out.set_item("result", print_host(&result.graph))?;
    out.set_item("applications", result.stats.applications)?;
    out.set_item("match_attempts", result.stats.match_attempts)?;
    out.set_item("wall_time_s", result.stats.wall.as_secs_f64())?;
    Ok(out.into())
}

/// Total weight of a minimum spanning tree, from the union-find
/// reference implementation.
#[pyfunction]
fn oracle_mst_weight(host: &str) -> PyResult<i64> {
    let graph = parse_host(host).map_err(value_err)?;
    graft_core::oracle::oracle_mst_weight(&graph).map_err(value_err)
}

/// End-state violations of a result graph against its input; an empty
/// list means the run left a clean minimum-spanning-tree state.
#[pyfunction]
fn validate(input: &str, result: &str) -> PyResult<Vec<String>> {
    let input = parse_host(input).map_err(value_err)?;
    let result = parse_host(result).map_err(value_err)?;
    Ok(validate_end_state(&input, &result))
}

/// Parse host-graph text and print it back in canonical form.
#[pyfunction]
fn canonical(host: &str) -> PyResult<String> {
    Ok(print_host(&parse_host(host).map_err(value_err)?))
}

/// Run an arbitrary program (in the textual format) on a host graph.
/// Returns a dict with the outcome ("success", "fail" or "limit"), the
/// result text on success, and the number of rule applications.
#[pyfunction]
#[pyo3(signature = (program, host, seed=None, step_limit=None))]
fn run_program(
    py: Python<'_>,
    program: &str,
    host: &str,
    seed: Option<u64>,
    step_limit: Option<u64>,
) -> PyResult<Py<PyDict>> {
    let graph = parse_host(host).map_err(value_err)?;
    let program = parse_program(program).map_err(value_err)?;
    let loaded = load(&program).map_err(value_err)?;
    let options = ExecOptions {
        seed,
        step_limit: step_limit.unwrap_or_else(|| ExecOptions::default().step_limit),
    };
    let (outcome, stats) = execute(&loaded, &graph, &options);
    let out = PyDict::new(py);
    match outcome {
        Outcome::Success(g) => {
            out.set_item("outcome", "success")?;
            out.set_item("result", print_host(&g))?;
        }
        Outcome::Fail => out.set_item("outcome", "fail")?,
        Outcome::Limit => out.set_item("outcome", "limit")?,
    }
    out.set_item("applications", stats.applications)?;
    Ok(out.into())
}

/// The shipped program source text.
#[pyfunction]
fn mst_program_source() -> &'static str {
    MST_BORUVKA_SOURCE
}

#[pymodule]
fn graft_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_mst, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_mst_weight, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    m.add_function(wrap_pyfunction!(run_program, m)?)?;
    m.add_function(wrap_pyfunction!(mst_program_source, m)?)?;
    Ok(())
}

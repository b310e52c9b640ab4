//! Python bindings: instances, dual growth, the scale-or-contract solver and
//! the exact oracles. Rationals cross the boundary as `p/q` strings; larger
//! results (reports, traces) arrive as plain dicts.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use moatforge::gap::{scale_or_contract, theorem_ratio, SolveConfig};
use moatforge::growth::{run_growth, GrowthConfig, GrowthMode};
use moatforge::instance::{
    generate_family, metric_closure, parse_instance, render_native, Family, Format, Instance,
};
use moatforge::merge::{terminal_mst, MergeForest};
use moatforge::oracles::{self, LpSpec, Method, Relaxation};
use moatforge::rat::{format_rat, parse_rat};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .expect("json number")
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

/// A weighted Steiner tree instance with terminals and a root.
#[pyclass(name = "Instance", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edges.len()
    }

    /// Terminal ids, 1-based.
    #[getter]
    fn terminals(&self) -> Vec<usize> {
        self.inner.terminals.iter().map(|t| t + 1).collect()
    }

    #[getter]
    fn root(&self) -> usize {
        self.inner.root + 1
    }

    /// Edges as (u, v, cost) with 1-based ids and `p/q` costs.
    fn edges(&self) -> Vec<(usize, usize, String)> {
        self.inner
            .edges
            .iter()
            .map(|e| (e.u + 1, e.v + 1, format_rat(&e.cost)))
            .collect()
    }

    /// Render in the native text format.
    fn render(&self) -> String {
        render_native(&self.inner)
    }

    /// Terminal MST cost in the metric closure, as `p/q`.
    fn terminal_mst_cost(&self) -> String {
        let m = metric_closure(&self.inner);
        format_rat(&terminal_mst(&m).1)
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(n={}, m={}, k={})",
            self.inner.vertex_count,
            self.inner.edges.len(),
            self.inner.terminals.len()
        )
    }
}

/// Parse an instance from text ("native" or "stp").
#[pyfunction]
#[pyo3(signature = (text, format = "native"))]
fn parse(text: &str, format: &str) -> PyResult<PyInstance> {
    let fmt = match format {
        "native" => Format::Native,
        "stp" => Format::Stp,
        other => return Err(PyValueError::new_err(format!("unknown format `{other}`"))),
    };
    Ok(PyInstance {
        inner: parse_instance(text, fmt).map_err(err)?,
    })
}

/// Generate a named instance family.
#[pyfunction]
#[pyo3(signature = (family, n = None, k = None, q = None, seed = None, delta = None))]
fn generate(
    family: &str,
    n: Option<usize>,
    k: Option<usize>,
    q: Option<usize>,
    seed: Option<u64>,
    delta: Option<&str>,
) -> PyResult<PyInstance> {
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    if let Some(n) = n {
        params.insert("n".into(), n.to_string());
    }
    if let Some(k) = k {
        params.insert("k".into(), k.to_string());
    }
    if let Some(q) = q {
        params.insert("q".into(), q.to_string());
    }
    if let Some(seed) = seed {
        params.insert("seed".into(), seed.to_string());
    }
    if let Some(delta) = delta {
        params.insert("delta".into(), delta.to_string());
    }
    let fam = Family::parse(family, &params).map_err(err)?;
    Ok(PyInstance {
        inner: generate_family(&fam).map_err(err)?,
    })
}

fn growth_config(delta: Option<&str>, mode: &str, halt_on_capture: bool) -> PyResult<GrowthConfig> {
    let mut cfg = GrowthConfig::table1();
    if let Some(d) = delta {
        cfg.delta = parse_rat(d).map_err(err)?;
    }
    cfg.mode = match mode {
        "continuous" => GrowthMode::Continuous,
        "subdivide" => GrowthMode::Subdivide,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    cfg.halt_on_capture = halt_on_capture;
    Ok(cfg)
}

/// Run the dual growth and return the trace as a dict.
#[pyfunction]
#[pyo3(signature = (instance, delta = None, mode = "continuous", halt_on_capture = true))]
fn grow(
    py: Python<'_>,
    instance: &PyInstance,
    delta: Option<&str>,
    mode: &str,
    halt_on_capture: bool,
) -> PyResult<Py<PyAny>> {
    let cfg = growth_config(delta, mode, halt_on_capture)?;
    let m = metric_closure(&instance.inner);
    let f = MergeForest::build(&m);
    let tr = run_growth(&m, &f, &cfg).map_err(err)?;
    json_to_py(py, &tr.to_json())
}

/// Run the scale-or-contract procedure and return the gap report as a dict.
#[pyfunction]
#[pyo3(signature = (instance, delta = None, gamma = None, h = 6))]
fn solve(
    py: Python<'_>,
    instance: &PyInstance,
    delta: Option<&str>,
    gamma: Option<&str>,
    h: usize,
) -> PyResult<Py<PyAny>> {
    let mut cfg = SolveConfig::default();
    if let Some(d) = delta {
        cfg.growth.delta = parse_rat(d).map_err(err)?;
    }
    if let Some(g) = gamma {
        cfg.gamma = parse_rat(g).map_err(err)?;
    }
    cfg.h = h;
    let report = scale_or_contract(&instance.inner, &cfg).map_err(err)?;
    json_to_py(py, &report.to_json())
}

/// Exact optimum Steiner tree cost (and closure-edge tree), Dreyfus-Wagner.
#[pyfunction]
fn dreyfus_wagner(instance: &PyInstance) -> PyResult<(String, Vec<(usize, usize)>)> {
    let m = metric_closure(&instance.inner);
    let (cost, edges) = oracles::dreyfus_wagner(&m).map_err(err)?;
    Ok((
        format_rat(&cost),
        edges.iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
    ))
}

/// Exact LP value of a cut relaxation ("ucr" or "bcr").
#[pyfunction]
#[pyo3(signature = (instance, relaxation = "bcr", method = "enumerate", root = None))]
fn lp_value(
    instance: &PyInstance,
    relaxation: &str,
    method: &str,
    root: Option<usize>,
) -> PyResult<String> {
    let root0 = match root {
        Some(r) if r >= 1 => r - 1,
        Some(_) => return Err(PyValueError::new_err("vertex ids are 1-based")),
        None => instance.inner.root,
    };
    let spec = LpSpec {
        relaxation: match relaxation {
            "ucr" => Relaxation::Ucr,
            "bcr" => Relaxation::Bcr { root: root0 },
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown relaxation `{other}`"
                )))
            }
        },
    };
    let method = match method {
        "enumerate" => Method::Enumerate,
        "separate" => Method::Separate,
        other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
    };
    let (value, _) = oracles::lp_value(&instance.inner, &spec, method).map_err(err)?;
    Ok(format_rat(&value))
}

/// The certified worst-case ratio 2(1+g+d)/((1+g)(1+d)) as `p/q`.
#[pyfunction]
fn ratio_bound(delta: &str, gamma: &str) -> PyResult<String> {
    let d = parse_rat(delta).map_err(err)?;
    let g = parse_rat(gamma).map_err(err)?;
    Ok(format_rat(&theorem_ratio(&d, &g)))
}

#[pymodule]
fn moatforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(grow, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(dreyfus_wagner, m)?)?;
    m.add_function(wrap_pyfunction!(lp_value, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_bound, m)?)?;
    Ok(())
}

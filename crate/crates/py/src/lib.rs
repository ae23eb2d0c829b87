//! Python bindings: graphs, certified expanders, embeddings, CSP instances
//! and the compiler with assignment transport.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cspembed::compile::{pipeline, CompileError, PipelineMetrics};
use cspembed::csp::{self, CspError, CspJson};
use cspembed::embedding::ConnectedEmbedding;
use cspembed::{expander, families, Assignment, CompiledInstance, Config};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn csp_err(e: CspError) -> PyErr {
    match e {
        CspError::BudgetExceeded(_) => PyRuntimeError::new_err(e.to_string()),
        e => value_err(e),
    }
}

/// Converts a serialisable value into plain Python objects.
fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Graph", module = "cspembed", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGraph {
    pub inner: cspembed::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: cspembed::Graph::new(n, edges).map_err(value_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.n() {
            return Err(value_err(format!("vertex {v} out of range")));
        }
        Ok(self.inner.degree(v))
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn is_bipartite(&self) -> bool {
        cspembed::graph::is_bipartite(&self.inner).is_some()
    }

    #[staticmethod]
    fn octahedron() -> Self {
        PyGraph {
            inner: families::octahedron(),
        }
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        PyGraph {
            inner: families::complete(n),
        }
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        if n < 3 {
            return Err(value_err("a cycle needs at least 3 vertices"));
        }
        Ok(PyGraph {
            inner: families::cycle(n),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, d, seed=0))]
    fn random_regular(n: usize, d: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        families::random_regular(n, d, &mut rng, 100_000)
            .map(|inner| PyGraph { inner })
            .ok_or_else(|| value_err(format!("no {d}-regular graph on {n} vertices found")))
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.edge_count())
    }
}

/// A `k`-vertex cubic bipartite expander with its Cheeger certificate, as a dict.
#[pyfunction]
#[pyo3(signature = (k, seed=0))]
fn bipartite_expander<'py>(py: Python<'py>, k: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let params = Config::default().embed.expander;
    let e = expander::bipartite_expander(k, seed, &params).map_err(value_err)?;
    to_py(py, &e)
}

/// Embeds `graph` into a fresh `k`-vertex expander. Returns the embedding
/// together with its depth, congestion and routing statistics.
#[pyfunction]
#[pyo3(signature = (graph, k, seed=0))]
fn embed<'py>(py: Python<'py>, graph: &PyGraph, k: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let out = cspembed::embedding::embed(&graph.inner, k, seed, &Config::default().embed).map_err(value_err)?;
    to_py(py, &out)
}

#[pyclass(name = "CspInstance", module = "cspembed", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyCsp {
    pub inner: cspembed::CspInstance,
}

#[pymethods]
impl PyCsp {
    /// Builds an instance from `(u, v, allowed_pairs)` constraints.
    #[new]
    fn new(alphabet_sizes: Vec<usize>, constraints: Vec<(usize, usize, Vec<(usize, usize)>)>) -> PyResult<Self> {
        let n = alphabet_sizes.len();
        let mut rels = Vec::with_capacity(constraints.len());
        for (u, v, pairs) in constraints {
            let (su, sv) = match (alphabet_sizes.get(u), alphabet_sizes.get(v)) {
                (Some(&a), Some(&b)) => (a, b),
                _ => return Err(value_err(format!("constraint ({u}, {v}) names a missing variable"))),
            };
            rels.push((u, v, cspembed::Relation::explicit(su, sv, pairs).map_err(csp_err)?));
        }
        let inner = cspembed::CspInstance::from_constraints(n, alphabet_sizes, rels).map_err(csp_err)?;
        Ok(PyCsp { inner })
    }

    #[staticmethod]
    fn coloring(graph: &PyGraph, q: usize) -> PyResult<Self> {
        Ok(PyCsp {
            inner: csp::coloring_instance(&graph.inner, q).map_err(csp_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, edge_probability, alphabet_size, pair_density, seed=0))]
    fn random(n: usize, edge_probability: f64, alphabet_size: usize, pair_density: f64, seed: u64) -> PyResult<Self> {
        if !(0.0..=1.0).contains(&edge_probability) || !(0.0..=1.0).contains(&pair_density) {
            return Err(value_err("probabilities must lie in [0, 1]"));
        }
        Ok(PyCsp {
            inner: csp::random_instance(n, edge_probability, alphabet_size, pair_density, seed).map_err(csp_err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let j: CspJson = serde_json::from_str(text).map_err(value_err)?;
        Ok(PyCsp {
            inner: j.to_instance().map_err(csp_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        let j = CspJson::from_instance(&self.inner).map_err(csp_err)?;
        serde_json::to_string(&j).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alphabet_sizes(&self) -> Vec<usize> {
        self.inner.alphabet_sizes().to_vec()
    }

    #[getter]
    fn graph(&self) -> PyGraph {
        PyGraph {
            inner: self.inner.graph().clone(),
        }
    }

    fn is_satisfied(&self, assignment: Vec<usize>) -> PyResult<bool> {
        csp::is_satisfied(&self.inner, &Assignment(assignment)).map_err(csp_err)
    }

    /// A satisfying assignment, or None. Raises RuntimeError past the node budget.
    #[pyo3(signature = (node_budget=None))]
    fn solve(&self, py: Python<'_>, node_budget: Option<u64>) -> PyResult<Option<Vec<usize>>> {
        let params = solver(node_budget);
        let inner = &self.inner;
        py.detach(|| csp::solve_bruteforce_with(inner, &params))
            .map(|a| a.map(|a| a.0))
            .map_err(csp_err)
    }

    #[pyo3(signature = (node_budget=None))]
    fn count(&self, py: Python<'_>, node_budget: Option<u64>) -> PyResult<u128> {
        let params = solver(node_budget);
        let inner = &self.inner;
        py.detach(|| csp::count_satisfying_with(inner, &params)).map_err(csp_err)
    }

    fn __repr__(&self) -> String {
        format!("CspInstance(n={}, constraints={})", self.inner.n(), self.inner.graph().edge_count())
    }
}

fn solver(node_budget: Option<u64>) -> cspembed::config::SolverParams {
    let mut params = Config::default().solver;
    if let Some(b) = node_budget {
        params.node_budget = b;
    }
    params
}

#[pyclass(name = "Compiled", module = "cspembed", frozen)]
pub struct PyCompiled {
    compiled: CompiledInstance,
    embedding: ConnectedEmbedding,
    metrics: PipelineMetrics,
}

fn compile_err(e: CompileError) -> PyErr {
    match e {
        CompileError::Csp(e) => csp_err(e),
        e => value_err(e),
    }
}

#[pymethods]
impl PyCompiled {
    /// Embeds the constraint graph of `gamma` into a `k`-vertex expander and
    /// compiles it into the host instance.
    #[new]
    #[pyo3(signature = (gamma, k, seed=0))]
    fn new(py: Python<'_>, gamma: &PyCsp, k: usize, seed: u64) -> PyResult<Self> {
        let g = &gamma.inner;
        let out = py.detach(|| pipeline(g, k, seed, &Config::default())).map_err(compile_err)?;
        Ok(PyCompiled {
            compiled: out.compiled,
            embedding: out.embedding.embedding,
            metrics: out.metrics,
        })
    }

    #[getter]
    fn phi(&self) -> PyCsp {
        PyCsp {
            inner: self.compiled.phi.clone(),
        }
    }

    #[getter]
    fn host(&self) -> PyGraph {
        PyGraph {
            inner: self.compiled.index.host().clone(),
        }
    }

    #[getter]
    fn bags(&self) -> Vec<Vec<usize>> {
        self.compiled.index.bags().to_vec()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.compiled.index.depth()
    }

    fn embedding<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.embedding)
    }

    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.metrics)
    }

    fn encode(&self, assignment: Vec<usize>) -> PyResult<Vec<usize>> {
        self.compiled.encode(&Assignment(assignment)).map(|a| a.0).map_err(value_err)
    }

    /// Raises ValueError if representatives of a source variable disagree.
    fn decode(&self, assignment: Vec<usize>) -> PyResult<Vec<usize>> {
        self.compiled.decode(&Assignment(assignment)).map(|a| a.0).map_err(value_err)
    }
}

#[pymodule]
#[pyo3(name = "cspembed")]
fn cspembed_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyCsp>()?;
    m.add_class::<PyCompiled>()?;
    m.add_function(wrap_pyfunction!(bipartite_expander, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    Ok(())
}

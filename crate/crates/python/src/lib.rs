use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use stabgame::bounds::{bound_report, toric_bound as core_toric_bound, ReportOptions};
use stabgame::cluster::{
    classical_value_cluster, cluster_table, cluster_table_csv as core_table_csv,
    lower_bound_closed_form, DEFAULT_CLUSTER_CAP,
};
use stabgame::game::{self, QuerySet};
use stabgame::num::fmt_ratio;
use stabgame::pauli;
use stabgame::qsim;
use stabgame::states::{self, GraphSpec, ToricLattice};
use stabgame::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Verification(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "PauliOperator", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPauli(pauli::PauliOperator);

#[pymethods]
impl PyPauli {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        text.parse().map(PyPauli).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn multiply(&self, other: &PyPauli) -> PyResult<PyPauli> {
        self.0.multiply(&other.0).map(PyPauli).map_err(to_py)
    }

    fn commutes(&self, other: &PyPauli) -> PyResult<bool> {
        self.0.commutes(&other.0).map_err(to_py)
    }

    fn __mul__(&self, other: &PyPauli) -> PyResult<PyPauli> {
        self.multiply(other)
    }

    fn __eq__(&self, other: &PyPauli) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PauliOperator('{}')", self.0)
    }
}

#[pyclass(name = "StabilizerGenerators", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGenerators(pauli::StabilizerGenerators);

#[pymethods]
impl PyGenerators {
    /// One signed Pauli string per line.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        pauli::StabilizerGenerators::parse(text)
            .map(PyGenerators)
            .map_err(to_py)
    }

    #[staticmethod]
    fn ghz(n: usize) -> PyResult<Self> {
        states::ghz_generators(n).map(PyGenerators).map_err(to_py)
    }

    /// Graph state from 0-based edges.
    #[staticmethod]
    fn graph(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        let g = GraphSpec::new(n, edges).map_err(to_py)?;
        states::graph_generators(&g)
            .map(PyGenerators)
            .map_err(to_py)
    }

    #[staticmethod]
    fn cycle(n: usize) -> PyResult<Self> {
        let g = GraphSpec::cycle(n).map_err(to_py)?;
        states::graph_generators(&g)
            .map(PyGenerators)
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (l, with_logical_z = false))]
    fn toric(l: usize, with_logical_z: bool) -> PyResult<Self> {
        let lat = ToricLattice::new(l).map_err(to_py)?;
        states::toric_generators(&lat, with_logical_z)
            .map(PyGenerators)
            .map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn r(&self) -> usize {
        self.0.r()
    }

    fn generators(&self) -> Vec<PyPauli> {
        self.0.generators().iter().cloned().map(PyPauli).collect()
    }

    fn elements(&self) -> PyResult<Vec<PyPauli>> {
        Ok(self
            .0
            .elements()
            .map_err(to_py)?
            .into_iter()
            .map(PyPauli)
            .collect())
    }

    fn __str__(&self) -> String {
        self.0
            .generators()
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[pyclass(name = "Game", frozen)]
struct PyGame {
    gens: pauli::StabilizerGenerators,
    game: game::GameInstance,
}

#[pymethods]
impl PyGame {
    /// `queries` is `"full"` or `"coset:x1=1,..."`.
    #[new]
    #[pyo3(signature = (gens, queries = "full"))]
    fn new(gens: &PyGenerators, queries: &str) -> PyResult<Self> {
        let q: QuerySet = queries.parse().map_err(to_py)?;
        let game = game::build_game(&gens.0, &q).map_err(to_py)?;
        Ok(PyGame {
            gens: gens.0.clone(),
            game,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.game.n()
    }

    #[getter]
    fn r(&self) -> usize {
        self.game.r()
    }

    #[getter]
    fn query_count(&self) -> usize {
        self.game.query_count()
    }

    /// `(letters, parity)` for every query.
    fn question_answer_pairs(&self) -> Vec<(String, bool)> {
        self.game.question_answer_pairs()
    }

    /// Exact classical value as `"p/q"`.
    #[pyo3(signature = (lhv = false))]
    fn classical_value(&self, lhv: bool) -> PyResult<String> {
        let opts = game::ValueOptions {
            lhv,
            ..Default::default()
        };
        let v = game::classical_value_with(&self.game, opts).map_err(to_py)?;
        Ok(fmt_ratio(&v.value))
    }

    /// Query indices of a refutation, or `None`.
    fn refutation(&self) -> PyResult<Option<Vec<usize>>> {
        Ok(game::find_refutation(&self.game)
            .map_err(to_py)?
            .map(|r| r.support))
    }

    /// Bound name to `"p/q"`, plus `lower`, `best_upper` and `exact`.
    fn bounds(&self) -> PyResult<Vec<(String, Option<String>)>> {
        let r =
            bound_report("", &self.gens, &self.game, &ReportOptions::default()).map_err(to_py)?;
        let mut out = vec![("lower".to_string(), Some(fmt_ratio(&r.lower)))];
        out.extend(r.upper.iter().map(|(k, v)| (k.clone(), Some(fmt_ratio(v)))));
        out.push(("best_upper".into(), Some(fmt_ratio(&r.best_upper))));
        out.push(("exact".into(), r.exact.as_ref().map(fmt_ratio)));
        Ok(out)
    }

    /// Win probability of the default protocol on the stabilizer state, or
    /// on the given amplitudes.
    #[pyo3(signature = (amplitudes = None))]
    fn quantum_win_probability(&self, amplitudes: Option<Vec<(f64, f64)>>) -> PyResult<f64> {
        let s = match amplitudes {
            None => qsim::stabilizer_state(&self.gens).map_err(to_py)?,
            Some(a) => qsim::StateVector::from_amplitudes(
                a.into_iter()
                    .map(|(re, im)| num_complex::Complex64::new(re, im))
                    .collect(),
            )
            .map_err(to_py)?,
        };
        qsim::quantum_win_probability(&self.game, &s).map_err(to_py)
    }
}

/// `(value, lower_bound)` of the cyclic cluster game as `"p/q"` strings.
#[pyfunction]
fn cluster_value(n: usize) -> PyResult<(String, String)> {
    let v = classical_value_cluster(n).map_err(to_py)?;
    let l = lower_bound_closed_form(n).map_err(to_py)?;
    Ok((fmt_ratio(&v.value), fmt_ratio(&l)))
}

#[pyfunction]
#[pyo3(signature = (n_max, cap = DEFAULT_CLUSTER_CAP))]
fn cluster_table_csv(n_max: usize, cap: usize) -> PyResult<String> {
    Ok(core_table_csv(&cluster_table(n_max, cap).map_err(to_py)?))
}

/// `(bound, certified_rank)` for the L x L toric code.
#[pyfunction]
fn toric_bound(l: usize) -> PyResult<(String, usize)> {
    let t = core_toric_bound(l).map_err(to_py)?;
    Ok((fmt_ratio(&t.bound), t.certified_rank))
}

#[pymodule]
fn stabgame_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPauli>()?;
    m.add_class::<PyGenerators>()?;
    m.add_class::<PyGame>()?;
    m.add_function(wrap_pyfunction!(cluster_value, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_table_csv, m)?)?;
    m.add_function(wrap_pyfunction!(toric_bound, m)?)?;
    Ok(())
}

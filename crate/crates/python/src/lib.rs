//! Python bindings for the contribution game, page simulator and validator.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wikigame_core::empirics::{self, EmpiricsError, LinearFit, PageData, DEFAULT_CLASS_TOL};
use wikigame_core::equilibrium::{self, DEFAULT_DYNAMICS_TOL, DEFAULT_MAX_SWEEPS};
use wikigame_core::wiki_sim::{self, ContributorId, HistoryConfig, SimError, WikiPage};
use wikigame_core::{game, EffortProfile, EquilibriumSolution, GameError, StrategyProfile};

create_exception!(
    wikigame,
    InvalidGameError,
    PyValueError,
    "Invalid effort or strategy profile."
);
create_exception!(
    wikigame,
    ConvergenceError,
    PyRuntimeError,
    "Best-response dynamics did not converge."
);
create_exception!(
    wikigame,
    DegenerateError,
    PyValueError,
    "A statistic is undefined for the given data."
);

fn game_err(e: GameError) -> PyErr {
    match e {
        GameError::NoConvergence { .. } => ConvergenceError::new_err(e.to_string()),
        e => InvalidGameError::new_err(e.to_string()),
    }
}

fn emp_err(e: EmpiricsError) -> PyErr {
    match e {
        EmpiricsError::Game(g) => game_err(g),
        EmpiricsError::Io(m) => PyOSError::new_err(m),
        e if e.is_degenerate() => DegenerateError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn sim_err(e: SimError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn profile(betas: Vec<f64>) -> PyResult<EffortProfile> {
    EffortProfile::new(betas).map_err(game_err)
}

fn strategies(x: Vec<f64>) -> PyResult<StrategyProfile> {
    StrategyProfile::new(x).map_err(game_err)
}

/// Equilibrium contributions and ownership.
#[pyclass(frozen, get_all, module = "wikigame")]
struct Equilibrium {
    strategies: Vec<f64>,
    ownership: Vec<f64>,
    active: Vec<usize>,
    method: &'static str,
    iterations: Option<usize>,
}

#[pymethods]
impl Equilibrium {
    #[getter]
    fn total_content(&self) -> f64 {
        self.strategies.iter().sum()
    }

    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(method={:?}, active={:?}, ownership={:?})",
            self.method, self.active, self.ownership
        )
    }
}

impl From<EquilibriumSolution> for Equilibrium {
    fn from(s: EquilibriumSolution) -> Self {
        Self {
            strategies: s.strategies,
            ownership: s.ownership,
            active: s.active,
            method: s.method.as_str(),
            iterations: s.iterations,
        }
    }
}

/// Ownership shares and net utilities `(u, n)` for contributions `x`.
#[pyfunction]
fn utility(x: Vec<f64>, betas: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let u = game::utility(&strategies(x)?, &profile(betas)?).map_err(game_err)?;
    Ok((u.ownership, u.net))
}

#[pyfunction]
fn foc_residual(x: Vec<f64>, betas: Vec<f64>) -> PyResult<Vec<f64>> {
    game::foc_residual(&strategies(x)?, &profile(betas)?).map_err(game_err)
}

#[pyfunction]
fn feasibility(betas: Vec<f64>) -> PyResult<Vec<bool>> {
    Ok(equilibrium::feasibility(&profile(betas)?))
}

#[pyfunction]
fn prune_active(betas: Vec<f64>) -> PyResult<Vec<usize>> {
    equilibrium::prune_active(&profile(betas)?).map_err(game_err)
}

#[pyfunction]
fn closed_form(betas: Vec<f64>) -> PyResult<Equilibrium> {
    Ok(equilibrium::closed_form(&profile(betas)?)
        .map_err(game_err)?
        .into())
}

/// Eigenbasis route; every contributor must be feasible.
#[pyfunction]
fn spectral_solve(betas: Vec<f64>) -> PyResult<Equilibrium> {
    Ok(equilibrium::spectral_solve(&profile(betas)?)
        .map_err(game_err)?
        .into())
}

#[pyfunction]
fn best_response(opponent_total: f64, beta: f64) -> PyResult<f64> {
    equilibrium::best_response(opponent_total, beta).map_err(game_err)
}

#[pyfunction]
#[pyo3(signature = (betas, init=None, tol=DEFAULT_DYNAMICS_TOL, max_iters=DEFAULT_MAX_SWEEPS))]
fn best_response_dynamics(
    py: Python<'_>,
    betas: Vec<f64>,
    init: Option<Vec<f64>>,
    tol: f64,
    max_iters: usize,
) -> PyResult<Equilibrium> {
    let efforts = profile(betas)?;
    let start = match init {
        Some(x) => strategies(x)?,
        None => equilibrium::default_start(&efforts),
    };
    py.detach(|| equilibrium::best_response_dynamics(&efforts, &start, tol, max_iters))
        .map(Into::into)
        .map_err(game_err)
}

#[pyfunction]
fn asymptotic_ownership(betas: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(equilibrium::asymptotic_ownership(&profile(betas)?))
}

#[pyfunction]
fn pearson(a: Vec<f64>, d: Vec<f64>) -> PyResult<f64> {
    empirics::pearson(&a, &d).map_err(emp_err)
}

/// Least-squares `(rho, delta)` for `d ~ rho * a + delta`.
#[pyfunction]
fn linear_fit(a: Vec<f64>, d: Vec<f64>) -> PyResult<(f64, f64)> {
    if a.len() != d.len() {
        return Err(emp_err(EmpiricsError::LengthMismatch(a.len(), d.len())));
    }
    let points: Vec<(f64, f64)> = a.into_iter().zip(d).collect();
    let fit = empirics::linear_fit(&points).map_err(emp_err)?;
    Ok((fit.rho, fit.delta))
}

/// Mean absolute error of the fit, in percent of mean observed ownership.
#[pyfunction]
fn holdout_error(rho: f64, delta: f64, a: Vec<f64>, d: Vec<f64>) -> PyResult<f64> {
    if a.len() != d.len() {
        return Err(emp_err(EmpiricsError::LengthMismatch(a.len(), d.len())));
    }
    let points: Vec<(f64, f64)> = a.into_iter().zip(d).collect();
    empirics::holdout_error(&LinearFit { rho, delta }, &points).map_err(emp_err)
}

#[pyfunction]
#[pyo3(signature = (values, tol=DEFAULT_CLASS_TOL))]
fn equivalence_classes(values: Vec<f64>, tol: f64) -> PyResult<Vec<Vec<usize>>> {
    empirics::equivalence_classes(&values, tol).map_err(emp_err)
}

/// Effort per edit from `(contributor, effort)` records, keyed by contributor.
#[pyfunction]
fn estimate_beta(records: Vec<(u32, f64)>) -> PyResult<BTreeMap<u32, f64>> {
    let log = empirics::EditLog::new(
        records
            .into_iter()
            .map(|(c, effort)| empirics::EditRecord {
                contributor: ContributorId(c),
                kind: wiki_sim::EditKind::AddContent,
                scope: wiki_sim::Scope::new(1).expect("1 is a valid scope"),
                effort,
            })
            .collect(),
    )
    .map_err(emp_err)?;
    let est = empirics::estimate_beta(&log).map_err(emp_err)?;
    Ok(est
        .contributors
        .iter()
        .map(|c| c.0)
        .zip(est.betas)
        .collect())
}

/// Generates one page history. Returns a dict with the edit records
/// (`editor, kind, scope, effort`) and the final sentence census. When
/// `out_dir` is given, history.tsv, edits.csv and census.csv are written there.
#[pyfunction]
#[pyo3(signature = (betas, edits, seed, out_dir=None))]
fn simulate_page<'py>(
    py: Python<'py>,
    betas: Vec<f64>,
    edits: usize,
    seed: u64,
    out_dir: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let efforts = profile(betas)?;
    let config = HistoryConfig {
        editors: efforts.len(),
        edits,
        efforts,
        seed,
    };
    let history = wiki_sim::generate_history(&config).map_err(sim_err)?;
    let census = match out_dir {
        Some(dir) => empirics::write_page_dir(&dir, &history).map_err(emp_err)?,
        None => WikiPage::replay(history.iter().map(|r| &r.edit))
            .map_err(sim_err)?
            .census(),
    };
    let records: Vec<(u32, &str, u8, f64)> = history
        .iter()
        .map(|r| {
            (
                r.edit.editor.0,
                r.edit.kind.as_str(),
                r.edit.scope.get(),
                r.effort,
            )
        })
        .collect();
    let counts: BTreeMap<u32, usize> = census.counts.iter().map(|(c, n)| (c.0, *n)).collect();
    let out = PyDict::new(py);
    out.set_item("edits", records)?;
    out.set_item("census", counts)?;
    out.set_item("revision", census.revision)?;
    Ok(out)
}

/// Runs the train/holdout protocol on page directories.
#[pyfunction]
#[pyo3(signature = (train, holdout=Vec::new(), tol=DEFAULT_CLASS_TOL))]
fn validate<'py>(
    py: Python<'py>,
    train: Vec<PathBuf>,
    holdout: Vec<PathBuf>,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = py
        .detach(|| {
            let load = |dirs: &[PathBuf]| {
                dirs.iter()
                    .map(|d| PageData::load(d))
                    .collect::<Result<Vec<_>, _>>()
            };
            empirics::validate(&load(&train)?, &load(&holdout)?, tol)
        })
        .map_err(emp_err)?;

    let out = PyDict::new(py);
    out.set_item("pooled_pearson", report.pooled_pearson)?;
    out.set_item("fit", report.fit.map(|f| (f.rho, f.delta)))?;
    out.set_item("training_error_percent", report.training_error_percent)?;
    let errors: Vec<(String, f64)> = report
        .holdout_errors
        .into_iter()
        .map(|h| (h.page, h.error_percent))
        .collect();
    out.set_item("holdout_errors", errors)?;
    let pages = report
        .pages
        .into_iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("name", p.name)?;
            d.set_item(
                "contributors",
                p.contributors.iter().map(|c| c.0).collect::<Vec<_>>(),
            )?;
            d.set_item("betas", p.betas)?;
            d.set_item("predicted", p.predicted)?;
            d.set_item("observed", p.observed)?;
            d.set_item("pearson", p.pearson)?;
            d.set_item("predicted_classes", p.predicted_classes.len())?;
            d.set_item("observed_classes", p.observed_classes.len())?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    out.set_item("pages", pages)?;
    Ok(out)
}

#[pymodule]
fn wikigame(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("InvalidGameError", py.get_type::<InvalidGameError>())?;
    m.add("ConvergenceError", py.get_type::<ConvergenceError>())?;
    m.add("DegenerateError", py.get_type::<DegenerateError>())?;
    m.add_class::<Equilibrium>()?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(foc_residual, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(prune_active, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_solve, m)?)?;
    m.add_function(wrap_pyfunction!(best_response, m)?)?;
    m.add_function(wrap_pyfunction!(best_response_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_ownership, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(linear_fit, m)?)?;
    m.add_function(wrap_pyfunction!(holdout_error, m)?)?;
    m.add_function(wrap_pyfunction!(equivalence_classes, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_beta, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_page, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lbexperts::learners::{correction_factor as corr, OnlineLearner};
use lbexperts::quantities::{self, BetaMode};
use lbexperts::{Algorithm, LbError, LearnerState, RandomStream, RoundFeedback};

pub mod api;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn lb(e: LbError) -> PyErr {
    value_err(e)
}

#[pyfunction]
fn correction_factor(p: f64, beta_s: f64) -> PyResult<f64> {
    corr(p, beta_s).map_err(lb)
}

#[pyfunction]
fn tune_eta(q: f64, num_experts: usize) -> PyResult<f64> {
    quantities::tune_eta(q, num_experts).map_err(lb)
}

/// Returns `(beta, q_used)`.
#[pyfunction]
#[pyo3(signature = (q, num_experts, delta, mode="hp_i", horizon=None))]
fn tune_beta(q: f64, num_experts: usize, delta: f64, mode: &str, horizon: Option<usize>) -> PyResult<(f64, f64)> {
    let mode: BetaMode = serde_json::from_value(serde_json::Value::String(mode.into())).map_err(value_err)?;
    let t = quantities::tune_beta(q, num_experts, delta, mode, horizon).map_err(lb)?;
    Ok((t.beta, t.q_used))
}

/// Bound quantities of round-major lower bounds and slacks, as JSON.
#[pyfunction]
fn bound_quantities(lower_bounds: Vec<f64>, slacks: Vec<f64>, num_experts: usize) -> PyResult<String> {
    let q = quantities::second_order_q(&lower_bounds, &slacks, num_experts).map_err(lb)?;
    serde_json::to_string(&q).map_err(value_err)
}

#[pyfunction]
fn generate_instance(spec_json: &str) -> PyResult<String> {
    api::generate(spec_json).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (config_json, seed=None))]
fn run_episode(config_json: &str, seed: Option<u64>) -> PyResult<String> {
    api::run(config_json, seed).map_err(value_err)
}

#[pyfunction]
fn estimate(py: Python<'_>, config_json: &str) -> PyResult<String> {
    py.allow_threads(|| api::estimate(config_json)).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (seed=7, replicates=None))]
fn verify(py: Python<'_>, seed: u64, replicates: Option<usize>) -> PyResult<String> {
    py.allow_threads(|| api::verify(seed, replicates)).map_err(value_err)
}

/// A fixed-rate learner driven step by step from Python.
#[pyclass]
struct Learner {
    state: LearnerState,
    rng: RandomStream,
}

#[pymethods]
impl Learner {
    #[new]
    #[pyo3(signature = (algorithm, num_experts, eta, beta=0.0, seed=0))]
    fn new(algorithm: &str, num_experts: usize, eta: f64, beta: f64, seed: u64) -> PyResult<Self> {
        let alg: Algorithm = serde_json::from_value(serde_json::Value::String(algorithm.into())).map_err(value_err)?;
        Ok(Learner {
            state: LearnerState::new(alg, num_experts, eta, beta).map_err(lb)?,
            rng: RandomStream::new(seed),
        })
    }

    fn distribution(&self) -> Vec<f64> {
        self.state.distribution().as_slice().to_vec()
    }

    /// Draws an action (0-based) from the current distribution.
    fn sample(&mut self) -> usize {
        lbexperts::sample_action(self.state.distribution(), &mut self.rng)
    }

    fn observe_lower_bounds(&mut self, chosen: usize, chosen_loss: f64, lower_bounds: Vec<f64>) -> PyResult<()> {
        self.state
            .observe(&RoundFeedback::LowerBounds { chosen, chosen_loss, lower_bounds })
            .map_err(lb)
    }

    fn observe_upper_bounds(&mut self, chosen: usize, chosen_loss: f64, upper_bounds: Vec<f64>, slack_cap: f64) -> PyResult<()> {
        self.state
            .observe(&RoundFeedback::UpperBounds { chosen, chosen_loss, upper_bounds, slack_cap })
            .map_err(lb)
    }

    fn observe_alphas(&mut self, chosen: usize, chosen_loss: f64, alphas: Vec<f64>) -> PyResult<()> {
        self.state
            .observe(&RoundFeedback::Alphas { chosen, chosen_loss, alphas })
            .map_err(lb)
    }

    fn observe_full(&mut self, chosen: usize, losses: Vec<f64>) -> PyResult<()> {
        self.state.observe(&RoundFeedback::FullLosses { chosen, losses }).map_err(lb)
    }

    #[getter]
    fn cum_est_losses(&self) -> Vec<f64> {
        self.state.cum_est_losses.clone()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.state.eta
    }
}

#[pymodule]
#[pyo3(name = "lbexperts")]
fn lbexperts_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(correction_factor, m)?)?;
    m.add_function(wrap_pyfunction!(tune_eta, m)?)?;
    m.add_function(wrap_pyfunction!(tune_beta, m)?)?;
    m.add_function(wrap_pyfunction!(bound_quantities, m)?)?;
    m.add_function(wrap_pyfunction!(generate_instance, m)?)?;
    m.add_function(wrap_pyfunction!(run_episode, m)?)?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<Learner>()?;
    Ok(())
}

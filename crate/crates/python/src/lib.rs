//! Python bindings. Structured results come back as plain dicts and lists
//! decoded from the library's JSON form.

use hierarch_core::agents::{run_repeated_pbcg, AgentPolicy};
use hierarch_core::cli::fit_dataset;
use hierarch_core::estimation::{BootstrapOptions, FitOptions, ModelKind};
use hierarch_core::games::{canonical_gg_rounds, Condition, Fraction, GameKind, PbcgSpec, TargetStatistic};
use hierarch_core::harness::{parse_answer as parse, render_prompt as render};
use hierarch_core::hierarchy::{self, PredictionLadder};
use hierarch_core::stats::{self, Alternative, KsMethod};
use hierarch_core::store::{ResponseDataset, ResponseRow};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parsed<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(value_err)
}

/// Truncated Poisson beliefs of a step-k player over steps 0..k-1.
#[pyfunction]
fn poisson_conditional(tau: f64, k: usize) -> PyResult<Vec<f64>> {
    hierarchy::poisson_conditional(tau, k).map_err(value_err)
}

/// Prediction ladders as dicts. `condition` picks the pBCG or MRG variant;
/// guessing-game ladders cover all sixteen rounds for both players.
#[pyfunction]
#[pyo3(signature = (game, model = "levelk", tau = 1.5, k = None, condition = None))]
fn predict<'py>(
    py: Python<'py>,
    game: &str,
    model: &str,
    tau: f64,
    k: Option<usize>,
    condition: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let game: GameKind = parsed(game)?;
    let model: ModelKind = parsed(model)?;
    let condition: Option<Condition> = condition.map(parsed).transpose()?;
    let k = k.unwrap_or(match (game, model) {
        (GameKind::Gg, ModelKind::LevelK) => 20,
        (GameKind::Gg, ModelKind::Ch) => 5,
        _ => 4,
    });
    let mut ladders: Vec<PredictionLadder> = Vec::new();
    match game {
        GameKind::Pbcg => {
            let spec = condition
                .unwrap_or(Condition::PbcgBaseline)
                .pbcg_spec()
                .ok_or_else(|| value_err("not a beauty-contest condition"))?;
            ladders.push(
                match model {
                    ModelKind::LevelK => hierarchy::pbcg_levelk(&spec, k),
                    ModelKind::Ch => hierarchy::pbcg_ch(&spec, tau, k),
                }
                .map_err(value_err)?,
            );
        }
        GameKind::Mrg => {
            let variant = condition
                .unwrap_or(Condition::MrgGame1)
                .mrg_variant()
                .ok_or_else(|| value_err("not a money-request condition"))?;
            ladders.push(
                match model {
                    ModelKind::LevelK => hierarchy::mrg_levelk(variant, k),
                    ModelKind::Ch => hierarchy::mrg_ch(variant, tau, k),
                }
                .map_err(value_err)?,
            );
        }
        GameKind::Gg => {
            for round in canonical_gg_rounds() {
                let (a, b) = match model {
                    ModelKind::LevelK => hierarchy::gg_levelk(&round, k),
                    ModelKind::Ch => hierarchy::gg_ch(&round, tau, k),
                }
                .map_err(value_err)?;
                ladders.extend([a, b]);
            }
        }
    }
    to_py(py, &ladders)
}

/// Fits level-k or CH to one-shot responses of a condition. For the
/// guessing game pass one list of 16 guesses per subject.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (condition, responses, model = "ch", k = 4, bootstrap = 0, level = 0.95, seed = 0))]
fn fit<'py>(
    py: Python<'py>,
    condition: &str,
    responses: Vec<Vec<f64>>,
    model: &str,
    k: usize,
    bootstrap: usize,
    level: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let condition: Condition = parsed(condition)?;
    let model: ModelKind = parsed(model)?;
    let mut ds = ResponseDataset::new();
    for (s, values) in responses.iter().enumerate() {
        for (r, &value) in values.iter().enumerate() {
            let (subject, round) = match condition.kind() {
                GameKind::Gg => (s, r + 1),
                _ => (s * values.len() + r, 1),
            };
            ds.push(ResponseRow {
                source: "python".into(),
                condition,
                subject: format!("s{:04}", subject + 1),
                round,
                value,
                temperature: None,
                timestamp: None,
                incoherent: false,
            })
            .map_err(value_err)?;
        }
    }
    let opts = FitOptions { k_max: k, ..FitOptions::default() };
    let boot = (bootstrap > 0).then_some(BootstrapOptions { replicates: bootstrap, level, seed });
    let result = py.detach(|| fit_dataset(&ds, condition, 1, model, &opts, boot.as_ref())).map_err(value_err)?;
    to_py(py, &result)
}

/// Two-sample KS test; `alternative` is two-sided, less or greater.
#[pyfunction]
#[pyo3(signature = (x, y, alternative = "two-sided"))]
fn ks_two_sample<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>, alternative: &str) -> PyResult<Bound<'py, PyAny>> {
    let alt: Alternative = parsed(alternative)?;
    let r = stats::ks_two_sample(&x, &y, alt, KsMethod::Auto).map_err(value_err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (x, y, alpha = 0.05))]
fn dominance_verdict<'py>(py: Python<'py>, x: Vec<f64>, y: Vec<f64>, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = stats::dominance_verdict(&x, &y, alpha, KsMethod::Auto).map_err(value_err)?;
    to_py(py, &r)
}

/// Repeated beauty contest. `policies` is a JSON array of agent policies,
/// e.g. `[{"kind": "myopic-best-reply"}]`; one entry per player.
#[pyfunction]
#[pyo3(signature = (policies, p = "2/3", statistic = "mean", rounds = 10, seed = 0))]
fn simulate<'py>(
    py: Python<'py>,
    policies: &str,
    p: &str,
    statistic: &str,
    rounds: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let policies: Vec<AgentPolicy> = serde_json::from_str(policies).map_err(value_err)?;
    let p: Fraction = parsed(p)?;
    let statistic = match statistic {
        "mean" => TargetStatistic::Mean,
        "median" => TargetStatistic::Median,
        other => return Err(value_err(format!("unknown statistic {other:?}"))),
    };
    let spec = PbcgSpec::new(Some(policies.len() as u32), p, statistic).map_err(value_err)?;
    let log = run_repeated_pbcg(&policies, &spec, rounds, seed).map_err(value_err)?;
    to_py(py, &log)
}

/// The number inside the last `[ ]` of a reply.
#[pyfunction]
fn parse_answer(text: &str) -> PyResult<f64> {
    parse(text).map_err(value_err)
}

/// First-round messages of a condition as `(role, content)` pairs.
#[pyfunction]
fn render_prompt(condition: &str) -> PyResult<Vec<(String, String)>> {
    let condition: Condition = parsed(condition)?;
    let msgs = render(condition, 1, None).map_err(value_err)?;
    Ok(msgs.into_iter().map(|m| (m.role.as_str().to_string(), m.content)).collect())
}

#[pymodule]
fn hierarch(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(poisson_conditional, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(dominance_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_answer, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    Ok(())
}

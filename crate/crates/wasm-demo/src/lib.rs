//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every exported function returns a JSON string. The plain Rust functions
//! underneath do the work so they can be tested without a browser.

use sbfl_core::bench::{generate, GenParams};
use sbfl_core::formats::{emit_faults, emit_spectrum, emit_traces, parse_faults, parse_spectrum, parse_traces};
use sbfl_core::formulas::Formula;
use sbfl_core::metrics::evaluate;
use sbfl_core::pipeline::{run_subject, PipelineOptions, Subject};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Row {
    method: String,
    faulty: bool,
    ef: u32,
    ep: u32,
    nf: u32,
    np: u32,
    score: String,
    phi: u64,
    before: String,
    after: String,
}

#[derive(Serialize)]
struct Analysis {
    formula: String,
    rows: Vec<Row>,
    ties_before: usize,
    ties_after: usize,
}

#[derive(Serialize)]
struct SweepPoint {
    tie_pressure: f64,
    critical_share: f64,
    mean_tie_reduction: Option<f64>,
    avg_rank_before: Option<f64>,
    avg_rank_after: Option<f64>,
}

#[derive(Serialize)]
struct Texts {
    name: String,
    spectrum: String,
    traces: String,
    faults: String,
}

fn formula(name: &str, star: u32) -> Result<Formula, String> {
    Formula::from_name(name, star).map_err(|e| e.to_string())
}

/// Runs score, rank and tie-break on a subject given as file texts.
pub fn analyze_texts(spectrum: &str, traces: &str, faults: &str, formula_name: &str, star: u32) -> Result<String, String> {
    let err = |e: sbfl_core::Error| e.to_string();
    let formula = formula(formula_name, star)?;
    let subject = Subject {
        name: "input".into(),
        spectrum: parse_spectrum(spectrum).map_err(|e| format!("spectrum: {e}"))?,
        traces: parse_traces(traces).map_err(|e| format!("traces: {e}"))?,
        faults: parse_faults(faults).map_err(|e| format!("faults: {e}"))?,
    };
    subject.validate().map_err(err)?;
    let result = run_subject(&subject, formula, &PipelineOptions::default()).map_err(err)?;
    let rows = result
        .counters
        .iter()
        .enumerate()
        .map(|(i, (m, c))| Row {
            method: m.to_string(),
            faulty: result.fault_indices.contains(&i),
            ef: c.ef,
            ep: c.ep,
            nf: c.nf,
            np: c.np,
            score: format!("{:.4}", result.scores[i]),
            phi: result.phi[i],
            before: result.before.rank_of_index(i).mid.to_string(),
            after: result.after.ranking.rank_of_index(i).mid.to_string(),
        })
        .collect();
    let analysis = Analysis {
        formula: formula.to_string(),
        rows,
        ties_before: result.before.tie_count(),
        ties_after: result.after.ranking.tie_count(),
    };
    serde_json::to_string(&analysis).map_err(|e| e.to_string())
}

/// Evaluates batches of synthetic subjects at evenly spaced tie pressures.
pub fn sweep_points(
    seed: u64,
    subjects_per_level: usize,
    levels: usize,
    n_methods: usize,
    n_tests: usize,
    formula_name: &str,
) -> Result<String, String> {
    if levels < 2 || subjects_per_level == 0 {
        return Err("need at least two levels and one subject per level".into());
    }
    let formula = formula(formula_name, 2)?;
    let mut points = Vec::with_capacity(levels);
    for level in 0..levels {
        let tie_pressure = level as f64 / (levels - 1) as f64;
        let subjects = (0..subjects_per_level)
            .map(|k| {
                let seed = seed.wrapping_add((level * subjects_per_level + k) as u64);
                generate(GenParams { seed, n_methods, n_tests, fault_count: 1, tie_pressure })
            })
            .collect::<sbfl_core::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?;
        let report = evaluate(&subjects, formula, &PipelineOptions::default()).map_err(|e| e.to_string())?;
        let critical = report.per_bug.iter().filter(|o| o.critical_before).count();
        points.push(SweepPoint {
            tie_pressure,
            critical_share: critical as f64 / report.bugs as f64,
            mean_tie_reduction: report.tie_reduction.mean,
            avg_rank_before: report.avg_rank_before,
            avg_rank_after: report.avg_rank_after,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

/// Generates one synthetic subject and returns its three file texts.
pub fn generate_texts(seed: u64, n_methods: usize, n_tests: usize, tie_pressure: f64) -> Result<String, String> {
    let subject = generate(GenParams { seed, n_methods, n_tests, fault_count: 1, tie_pressure }).map_err(|e| e.to_string())?;
    let texts = Texts {
        name: subject.name.clone(),
        spectrum: emit_spectrum(&subject.spectrum),
        traces: emit_traces(&subject.traces),
        faults: emit_faults(&subject.faults),
    };
    serde_json::to_string(&texts).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn analyze(spectrum: &str, traces: &str, faults: &str, formula: &str, star: u32) -> Result<String, JsError> {
    analyze_texts(spectrum, traces, faults, formula, star).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sweep(
    seed: u32,
    subjects_per_level: u32,
    levels: u32,
    n_methods: u32,
    n_tests: u32,
    formula: &str,
) -> Result<String, JsError> {
    sweep_points(seed.into(), subjects_per_level as usize, levels as usize, n_methods as usize, n_tests as usize, formula)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn generate_subject(seed: u32, n_methods: u32, n_tests: u32, tie_pressure: f64) -> Result<String, JsError> {
    generate_texts(seed.into(), n_methods as usize, n_tests as usize, tie_pressure).map_err(|e| JsError::new(&e))
}

/// The running example as file texts, used to prefill the page.
#[wasm_bindgen]
pub fn example_texts() -> String {
    let subject = sbfl_core::bench::running_example();
    let texts = Texts {
        name: subject.name.clone(),
        spectrum: emit_spectrum(&subject.spectrum),
        traces: emit_traces(&subject.traces),
        faults: emit_faults(&subject.faults),
    };
    serde_json::to_string(&texts).expect("plain strings serialize")
}

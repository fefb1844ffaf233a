//! Browser bindings. Each export takes plain strings and numbers and returns a
//! JSON document; failures come back as `{"error": "..."}`.

use epochsim::dataset::DatasetBundle;
use epochsim::fixed::Fixed;
use epochsim::ledger::SampleTriple;
use epochsim::scenario::{faulted, simulate, Scenario, ScenarioConfig};
use epochsim::sim::SimRun;
use epochsim::tepc::{self, check_variable, qualify_by_voting, Tolerances, Weights};
use epochsim::ArchitectureKind;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(result: Result<Value, String>) -> String {
    result.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn fixed(text: &str) -> Result<Option<Fixed>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    text.parse().map(Some).map_err(|e| format!("{text:?}: {e}"))
}

/// `"t,p,h"` with blank channels as null; an all-blank string means the source sent nothing.
fn sample(text: &str) -> Result<Option<SampleTriple>, String> {
    if text.trim().is_empty() {
        return Ok(None);
    }
    let parts: Vec<&str> = text.split(',').collect();
    let [t, p, h] = parts.as_slice() else {
        return Err(format!("{text:?}: expected three comma-separated channels"));
    };
    Ok(Some(SampleTriple::from_channels([fixed(t)?, fixed(p)?, fixed(h)?])))
}

fn channels_json(s: &SampleTriple) -> Value {
    json!(s.channels().map(|c| c.map(|f| f.to_string())))
}

fn run_summary(run: &SimRun) -> Value {
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    for r in &run.receipts {
        *counts.entry(r.status.label()).or_default() += 1;
    }
    json!({
        "monthly_saving": tepc::monthly_savings(&run.state).last().map(|f| f.to_string()),
        "daily": run
            .daily_savings_by_day()
            .iter()
            .map(|(day, z)| json!({ "day": day, "saving": z.to_string() }))
            .collect::<Vec<_>>(),
        "receipts": counts,
        "blocks": run.chain.len(),
        "invalidated_blocks": run
            .chain
            .blocks()
            .iter()
            .filter(|b| b.status == epochsim::ledger::BlockStatus::Invalidated)
            .count(),
    })
}

pub fn compare_json(scenario: &str, seed: u32) -> Result<Value, String> {
    let scenario: Scenario = scenario.parse().map_err(|e: epochsim::Error| e.to_string())?;
    let clean = DatasetBundle::generate(seed as u64);
    let mut out = json!({ "scenario": scenario.name(), "seed": seed });
    for (label, kind, sc) in [
        ("baseline", ArchitectureKind::ExecuteOrderValidate, Scenario::S1),
        ("oe", ArchitectureKind::OrderExecute, scenario),
        ("eov", ArchitectureKind::ExecuteOrderValidate, scenario),
    ] {
        let config = ScenarioConfig::new(sc, kind, seed as u64);
        let data = faulted(&config, &clean).map_err(|e| e.to_string())?;
        let run = simulate(&config, &data).map_err(|e| e.to_string())?;
        out[label] = run_summary(&run);
    }
    Ok(out)
}

pub fn vote_json(esco: &str, meteo: &str, client: &str, weights: &str) -> Result<Value, String> {
    let sources = [sample(esco)?, sample(meteo)?, sample(client)?];
    let w: Vec<Fixed> = weights
        .split(',')
        .map(|s| fixed(s)?.ok_or_else(|| "blank weight".to_string()))
        .collect::<Result<_, _>>()?;
    let w: [Fixed; 3] = w.try_into().map_err(|_| "expected three weights".to_string())?;
    let q = qualify_by_voting(&sources, &Weights(w), &Tolerances::default());
    Ok(json!({
        "sample": channels_json(&q.sample),
        "reliability": q.reliability.to_string(),
    }))
}

pub fn clamp_json(sample_text: &str) -> Result<Value, String> {
    let s = sample(sample_text)?.ok_or_else(|| "empty sample".to_string())?;
    match check_variable(&s) {
        Ok(clamped) => Ok(json!({ "sample": channels_json(&clamped), "changed": clamped != s })),
        Err(e) => Ok(json!({ "exception": e.to_string() })),
    }
}

/// Daily savings of one scenario under both pipelines next to the fault-free baseline.
#[wasm_bindgen]
pub fn compare(scenario: &str, seed: u32) -> String {
    respond(compare_json(scenario, seed))
}

/// Qualified value for one hour from up to three `"t,p,h"` samples and `"w1,w2,w3"` weights.
#[wasm_bindgen]
pub fn vote(esco: &str, meteo: &str, client: &str, weights: &str) -> String {
    respond(vote_json(esco, meteo, client, weights))
}

#[wasm_bindgen]
pub fn clamp(sample: &str) -> String {
    respond(clamp_json(sample))
}

//! The bundled example corpus and its independent recount oracle.
//!
//! `fixtures/scenarios/` holds seven scenarios; `fixtures/oracle/recount.py`
//! recounts them with plain regular expressions and writes
//! `fixtures/oracle/expected_stats.json`. [`verify_fixture_oracle`] compares
//! that file against the `stats` numbers field by field.

use std::path::Path;

use serde_json::Value;

use crate::pipeline::{compile, Settings};
use crate::stats::CorpusStats;

pub const FIXTURE_SCENARIOS: [&str; 7] = [
    "cost_tracking",
    "crane_guidance",
    "logistics",
    "risk_management",
    "risk_planning",
    "risk_tracking",
    "truck_guidance",
];

/// (source, target, nature) of every relation in the bundled corpus.
pub const FIXTURE_RELATIONS: [(&str, &str, &str); 5] = [
    ("crane_guidance", "logistics", "refines"),
    ("risk_planning", "risk_management", "refines"),
    ("risk_tracking", "risk_management", "refines"),
    ("truck_guidance", "cost_tracking", "uses"),
    ("truck_guidance", "logistics", "refines"),
];

/// Every field where `stats` and the oracle disagree, or an empty list.
pub fn oracle_mismatches(stats: &CorpusStats, oracle_json: &str) -> Vec<String> {
    let oracle: Value = match serde_json::from_str(oracle_json) {
        Ok(v) => v,
        Err(e) => return vec![format!("oracle is not valid JSON: {e}")],
    };
    let Some(expected) = oracle.get("scenarios").and_then(Value::as_array) else {
        return vec!["oracle has no 'scenarios' array".to_string()];
    };
    let actual = serde_json::to_value(&stats.scenarios).expect("stats serialize");
    let actual = actual.as_array().expect("scenario list");

    let id = |v: &Value| v.get("identifier").and_then(Value::as_str).unwrap_or_default().to_string();
    let mut problems = Vec::new();
    for exp in expected {
        let name = id(exp);
        let Some(act) = actual.iter().find(|a| id(a) == name) else {
            problems.push(format!("{name}: missing from stats"));
            continue;
        };
        for (field, want) in exp.as_object().into_iter().flatten() {
            let got = act.get(field).unwrap_or(&Value::Null);
            if got != want {
                problems.push(format!("{name}.{field}: stats {got}, oracle {want}"));
            }
        }
    }
    for act in actual {
        let name = id(act);
        if !expected.iter().any(|e| id(e) == name) {
            problems.push(format!("{name}: missing from oracle"));
        }
    }
    problems
}

/// Compiles `scenarios_dir` with default settings and checks it against the
/// oracle file.
pub fn verify_fixture_oracle(scenarios_dir: &Path, oracle_path: &Path) -> Result<(), Vec<String>> {
    let settings = Settings::default();
    let compiled = compile(scenarios_dir, &settings).map_err(|e| vec![format!("cannot compile corpus: {e}")])?;
    let oracle = std::fs::read_to_string(oracle_path).map_err(|e| vec![format!("cannot read oracle: {e}")])?;
    let problems = oracle_mismatches(&compiled.stats(&settings), &oracle);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}

//! Experiment harness: finite searches and property sweeps, each producing an
//! [`ExperimentRecord`] that is appended to a JSON-lines store.
//!
//! Every witness an experiment reports is recomputed through
//! [`crate::walks::reference`] (and, for circle memberships, the rational
//! route in [`crate::torus::certify`]) before the record is produced. A
//! disagreement turns the verdict into [`Verdict::InternalError`].

pub mod absorption;
pub mod collisions;
pub mod lproperties;
pub mod membership;
pub mod osc_ladder;
pub mod store;
pub mod zero_sum;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::combinatorics::FamilyError;
use crate::exec::Exec;
use crate::torus::TorusError;
use crate::walks::{OscTable, WalkError};

pub use store::{LoadedRecords, RecordStore, StoreError};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    ReportOnly,
    InternalError,
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("unknown experiment `{name}`; available: {}", EXPERIMENTS.join(", "))]
    UnknownExperiment { name: String },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub schema: u32,
    pub experiment: String,
    pub version: String,
    pub parameters: Value,
    pub witnesses: Value,
    pub report: Value,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
    pub runtime_ms: u64,
    pub timestamp: String,
}

impl ExperimentRecord {
    /// The record without its wall-clock fields; identical runs give
    /// byte-identical payloads.
    pub fn payload(&self) -> String {
        let mut v = serde_json::to_value(self).expect("records serialize");
        if let Value::Object(map) = &mut v {
            map.remove("runtime_ms");
            map.remove("timestamp");
        }
        serde_json::to_string(&v).expect("records serialize")
    }
}

/// What an experiment body hands back to the harness.
pub struct Outcome {
    pub witnesses: Value,
    pub report: Value,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

pub struct Context<'a> {
    pub exec: Exec,
    pub table: &'a OscTable,
}

pub const EXPERIMENTS: [&str; 6] = [
    "l-properties",
    "osc-ladder",
    "product-membership",
    "zero-sum",
    "restriction-collisions",
    "k-absorption",
];

/// Default parameters of an experiment, as a JSON object.
pub fn default_parameters(name: &str) -> Result<Value, LabError> {
    let v = match name {
        "l-properties" => serde_json::to_value(lproperties::Params::default()),
        "osc-ladder" => serde_json::to_value(osc_ladder::Params::default()),
        "product-membership" => serde_json::to_value(membership::Params::default()),
        "zero-sum" => serde_json::to_value(zero_sum::Params::default()),
        "restriction-collisions" => serde_json::to_value(collisions::Params::default()),
        "k-absorption" => serde_json::to_value(absorption::Params::default()),
        other => {
            return Err(LabError::UnknownExperiment {
                name: other.to_string(),
            })
        }
    };
    Ok(v.expect("parameters serialize"))
}

fn parse<P: serde::de::DeserializeOwned>(v: Value) -> Result<P, LabError> {
    serde_json::from_value(v).map_err(|e| LabError::InvalidParameters(e.to_string()))
}

fn timestamp() -> String {
    let d = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .unwrap_or_default();
    format!("{}-{:09}", d.as_secs(), d.subsec_nanos())
}

/// Runs `name` with `parameters` (missing keys take their defaults).
pub fn run_experiment(name: &str, parameters: Value, ctx: &Context) -> Result<ExperimentRecord, LabError> {
    let mut merged = default_parameters(name)?;
    if let (Value::Object(base), Value::Object(over)) = (&mut merged, parameters) {
        for (k, v) in over {
            if !base.contains_key(&k) {
                return Err(LabError::InvalidParameters(format!("`{name}` has no parameter `{k}`")));
            }
            base.insert(k, v);
        }
    }
    let start = Instant::now();
    let (parameters, outcome) = match name {
        "l-properties" => {
            let p: lproperties::Params = parse(merged)?;
            (serde_json::to_value(&p), lproperties::run(&p, ctx)?)
        }
        "osc-ladder" => {
            let p: osc_ladder::Params = parse(merged)?;
            (serde_json::to_value(&p), osc_ladder::run(&p, ctx)?)
        }
        "product-membership" => {
            let p: membership::Params = parse(merged)?;
            (serde_json::to_value(&p), membership::run(&p, ctx)?)
        }
        "zero-sum" => {
            let p: zero_sum::Params = parse(merged)?;
            (serde_json::to_value(&p), zero_sum::run(&p, ctx)?)
        }
        "restriction-collisions" => {
            let p: collisions::Params = parse(merged)?;
            (serde_json::to_value(&p), collisions::run(&p, ctx)?)
        }
        "k-absorption" => {
            let p: absorption::Params = parse(merged)?;
            (serde_json::to_value(&p), absorption::run(&p, ctx)?)
        }
        other => {
            return Err(LabError::UnknownExperiment {
                name: other.to_string(),
            })
        }
    };
    Ok(ExperimentRecord {
        schema: SCHEMA,
        experiment: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: parameters.expect("parameters serialize"),
        witnesses: outcome.witnesses,
        report: outcome.report,
        verdict: outcome.verdict,
        warnings: outcome.warnings,
        runtime_ms: start.elapsed().as_millis() as u64,
        timestamp: timestamp(),
    })
}

/// Every experiment under its defaults, in [`EXPERIMENTS`] order.
pub fn run_default_suite(ctx: &Context) -> Result<Vec<ExperimentRecord>, LabError> {
    EXPERIMENTS
        .iter()
        .map(|name| run_experiment(name, Value::Object(Default::default()), ctx))
        .collect()
}

/// `Pass`/`Fail`/`ReportOnly` from the body, unless re-validation failed.
fn settle(revalidated: bool, verdict: Verdict) -> Verdict {
    if revalidated {
        verdict
    } else {
        Verdict::InternalError
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_list_the_catalogue() {
        let table = OscTable::new();
        let ctx = Context {
            exec: Exec::Sequential,
            table: &table,
        };
        let err = run_experiment("no-such", Value::Null, &ctx).unwrap_err();
        let msg = err.to_string();
        assert!(EXPERIMENTS.iter().all(|n| msg.contains(n)));
        let err = run_experiment("zero-sum", serde_json::json!({"bogus": 1}), &ctx).unwrap_err();
        assert!(matches!(err, LabError::InvalidParameters(_)));
    }

    #[test]
    fn payload_drops_clock_fields() {
        let r = ExperimentRecord {
            schema: SCHEMA,
            experiment: "x".into(),
            version: "0".into(),
            parameters: Value::Null,
            witnesses: Value::Null,
            report: Value::Null,
            verdict: Verdict::Pass,
            warnings: vec![],
            runtime_ms: 5,
            timestamp: "1".into(),
        };
        let mut s = r.clone();
        s.runtime_ms = 99;
        s.timestamp = "2".into();
        assert_eq!(r.payload(), s.payload());
        assert!(!r.payload().contains("runtime_ms"));
    }
}

//! Machine-readable run reports.
//!
//! Reports are emitted as canonical JSON: object keys sorted, no whitespace,
//! floats with 17 significant digits in exponent form, one trailing newline.
//! Equal inputs give byte-identical output, and parsing then re-emitting a
//! document reproduces it exactly.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimize::OverlapReport;
use crate::scenario::ledger::LedgerSummary;
use crate::scenario::{derive_certificates, ContradictionCertificate, EmncLedger, FidelityTable, TrialRecord};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    ArgumentOne,
    ArgumentTwo,
    EmBasic,
    OverlapLp,
    Bclm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub run_id: String,
    pub scenario: ScenarioKind,
    pub config: Value,
    pub seed: u64,
    pub trials: Vec<TrialRecord>,
    pub ledger_summary: Option<LedgerSummary>,
    pub ledger: Option<EmncLedger>,
    pub fidelities: Option<FidelityTable>,
    pub certificates: Vec<ContradictionCertificate>,
    pub overlap: Option<OverlapReport>,
    /// Scenario-specific results.
    pub details: Value,
    /// Wall-clock time; left out unless requested since it breaks byte stability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    /// Empty report whose id is derived from the scenario, config and seed.
    pub fn new(scenario: ScenarioKind, config: Value, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(canonical_json(&serde_json::to_value(scenario).unwrap_or(Value::Null)));
        hasher.update(canonical_json(&config));
        hasher.update(seed.to_le_bytes());
        let run_id = hex::encode(&hasher.finalize()[..8]);
        RunReport {
            schema_version: SCHEMA_VERSION,
            run_id,
            scenario,
            config,
            seed,
            trials: Vec::new(),
            ledger_summary: None,
            ledger: None,
            fidelities: None,
            certificates: Vec::new(),
            overlap: None,
            details: Value::Object(Default::default()),
            timing_ms: None,
        }
    }

    pub fn with_ledger(mut self, ledger: EmncLedger, fidelities: FidelityTable) -> Self {
        self.ledger_summary = Some(ledger.summary());
        self.ledger = Some(ledger);
        self.fidelities = Some(fidelities);
        self
    }

    /// Certificates re-derived from the ledger and fidelity table in this report.
    pub fn recompute_certificates(&self) -> Result<Vec<ContradictionCertificate>> {
        match (&self.ledger, &self.fidelities) {
            (Some(l), Some(f)) => derive_certificates(l, f),
            _ => Ok(Vec::new()),
        }
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Serialization(e.to_string()))
    }
}

pub fn emit_json(r: &RunReport) -> Vec<u8> {
    let value = serde_json::to_value(r).expect("reports contain only JSON-representable data");
    let mut out = canonical_json(&value);
    out.push('\n');
    out.into_bytes()
}

/// Canonical serialization of a JSON value (no trailing newline).
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(0.0)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serialization")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serialization"));
                out.push(':');
                write_value(&map[k], out);
            }
            out.push('}');
        }
    }
}

/// 17 significant digits, exponent form; `-0` prints as `0`.
fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

/// Trial log, one row per trial.
pub fn emit_trials_csv(records: &[TrialRecord]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["trial", "fprime", "f_basis", "f_outcome", "routed_to", "assigned_state"])
        .expect("write to memory");
    for r in records {
        w.write_record([
            r.trial_index.to_string(),
            r.fprime_outcome.to_string(),
            r.f_basis.to_string(),
            r.f_outcome.to_string(),
            r.routed_to.to_string(),
            r.assigned_state.to_string(),
        ])
        .expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

//! The run record and its JSON and CSV renderings.

use std::str::FromStr;

use clap::ValueEnum;
use lattice_pressure::models::ModelKind;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

impl FromStr for OutFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Serialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub model: Option<ModelKind>,
    pub results: Value,
    pub tool_version: String,
    pub constants: Value,
    pub wall_time_ms: u64,
}

pub fn render(record: &RunRecord, format: OutFormat) -> String {
    match format {
        OutFormat::Json => serde_json::to_string_pretty(record).expect("serializable"),
        OutFormat::Csv => csv(record),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn float(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        x.to_string()
    }
}

fn csv(record: &RunRecord) -> String {
    let r = &record.results;
    let mut lines = Vec::new();
    match record.command.as_str() {
        "probe" => {
            lines.push("n,pi_n,delta,log_delta,cumulative_runtime_ms".to_string());
            let ns = r["n_values"].as_array().cloned().unwrap_or_default();
            let pis = r["pi_values"].as_array().cloned().unwrap_or_default();
            let deltas = r["deltas"].as_array().cloned().unwrap_or_default();
            let times = r["cumulative_runtime_ms"].as_array().cloned().unwrap_or_default();
            for i in 0..ns.len() {
                let (delta, log_delta) = match i.checked_sub(1).and_then(|j| deltas[j].as_f64()) {
                    Some(d) => (float(d), float(d.ln())),
                    None => (String::new(), String::new()),
                };
                lines.push(format!("{},{},{},{},{}", cell(&ns[i]), cell(&pis[i]), delta, log_delta, cell(&times[i])));
            }
        }
        "verify" => {
            lines.push("suite,name,max_deviation,tolerance,passed".to_string());
            for c in r["checks"].as_array().into_iter().flatten() {
                lines.push(format!(
                    "{},{},{},{},{}",
                    cell(&c["suite"]),
                    cell(&c["name"]),
                    cell(&c["max_deviation"]),
                    cell(&c["tolerance"]),
                    cell(&c["passed"])
                ));
            }
        }
        "pressure" => {
            let model = record.model.map(|m| m.name()).unwrap_or_default();
            lines.push("model,value,n_used,rule_n,mode,regime,best_effort,achieved_bound,alpha_hat,flags".to_string());
            lines.push(format!(
                "{},{},{},{},{},{},{},{},{},{}",
                model,
                cell(&r["value"]),
                cell(&r["n_used"]),
                cell(&r["rule_n"]),
                cell(&r["mode"]["kind"]),
                cell(&r["regime"]),
                cell(&r["best_effort"]),
                cell(&r["achieved_bound"]),
                cell(&r["alpha_hat"]),
                cell(&r["flags"])
            ));
        }
        _ => {
            lines.push("key,value".to_string());
            if let Value::Object(map) = r {
                for (k, v) in map {
                    match v {
                        Value::Object(inner) => {
                            for (ik, iv) in inner {
                                lines.push(format!("{k}.{ik},{}", cell(iv)));
                            }
                        }
                        _ => lines.push(format!("{k},{}", cell(v))),
                    }
                }
            }
        }
    }
    lines.join("\n")
}

//! One-parameter sweeps, run concurrently with one worker per value.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::compare::{compare_analytic, ComparisonReport, ToleranceProfile};
use crate::error::{CliError, CliResult};
use crate::ledger::Totals;
use crate::output::{json_string, write_run, Format};
use crate::run::{run_scenario, Violation};
use crate::scenario::{ModelDoc, ScenarioDocument};

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    pub totals: Totals,
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
}

/// Ratios of per-column maximum deviations between consecutive values.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRatio {
    pub from: f64,
    pub to: f64,
    pub ratios: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub parameter: String,
    pub entries: Vec<SweepEntry>,
    pub ratios: Vec<SweepRatio>,
}

impl SweepReport {
    /// First invariant violation across all entries.
    pub fn check(&self) -> CliResult<()> {
        match self.entries.iter().flat_map(|e| e.violations.first()).next() {
            Some(v) => Err((*v).into()),
            None => Ok(()),
        }
    }
}

/// Dotted path into the document; a bare name refers to a model parameter.
fn parameter_path(param: &str) -> Vec<String> {
    if param.contains('.') {
        param.split('.').map(str::to_string).collect()
    } else {
        vec!["model".into(), "parameters".into(), param.into()]
    }
}

/// Copy of `base` with `param` set to `value`, parsed strictly.
pub fn with_parameter(base: &Value, param: &str, value: f64) -> CliResult<ScenarioDocument> {
    let path = parameter_path(param);
    let mut doc = base.clone();
    let mut slot = &mut doc;
    for key in &path {
        slot = slot
            .get_mut(key.as_str())
            .ok_or_else(|| CliError::validation(format!("`{param}`: no such field in the scenario")))?;
    }
    *slot = match slot {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 {
                return Err(CliError::validation(format!("`{param}`: expects an integer, got {value}")));
            }
            serde_json::json!(value as i64)
        }
        Value::Number(_) => serde_json::json!(value),
        _ => return Err(CliError::validation(format!("`{param}`: only numeric fields can be swept"))),
    };
    serde_json::from_value(doc).map_err(|e| CliError::validation(format!("`{param}` = {value}: {e}")))
}

fn ratios(entries: &[SweepEntry]) -> Vec<SweepRatio> {
    entries
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (w[0].comparison.as_ref()?, w[1].comparison.as_ref()?);
            let ratios = a
                .columns
                .iter()
                .filter_map(|c| {
                    let d = b.column(&c.column)?;
                    (d.max_abs > 0.0).then(|| (c.column.clone(), c.max_abs / d.max_abs))
                })
                .collect();
            Some(SweepRatio { from: w[0].value, to: w[1].value, ratios })
        })
        .collect()
}

/// Runs `base` once per value. Models with an oracle are also compared, and
/// consecutive comparisons yield deviation ratios. With `out`, every run is
/// written to `<out>/<param>=<value>/` and the report to `<out>/sweep.json`.
pub fn run_sweep(
    base: &ScenarioDocument,
    param: &str,
    values: &[f64],
    max_dim: usize,
    profile: ToleranceProfile,
    format: Format,
    out: Option<&Path>,
) -> CliResult<SweepReport> {
    if values.is_empty() {
        return Err(CliError::validation("`values`: at least one value is required"));
    }
    let base_value = serde_json::to_value(base).expect("scenario serializes");
    let entries = values
        .par_iter()
        .map(|&value| -> CliResult<SweepEntry> {
            let doc = with_parameter(&base_value, param, value)?;
            let outcome = run_scenario(&doc, max_dim)?;
            let comparison = match doc.model {
                ModelDoc::CustomBipartite(_) => None,
                _ => Some(compare_analytic(&doc, max_dim, profile)?),
            };
            let directory = match out {
                Some(root) => {
                    let name = format!("{param}={value}");
                    let dir = root.join(&name);
                    write_run(&dir, &outcome, &doc.outputs, format)?;
                    if let Some(c) = &comparison {
                        crate::output::write_atomic(&dir.join("comparison.json"), c.to_json().as_bytes())?;
                    }
                    Some(name)
                }
                None => None,
            };
            Ok(SweepEntry {
                value,
                directory,
                totals: outcome.summary.totals,
                violations: outcome.summary.violations,
                comparison,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let report = SweepReport { parameter: param.to_string(), ratios: ratios(&entries), entries };
    if let Some(root) = out {
        crate::output::write_atomic(&root.join("sweep.json"), json_string(&report).as_bytes())?;
    }
    Ok(report)
}

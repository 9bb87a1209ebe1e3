use std::fmt::Write as _;
use std::io::Write as _;

use serde_json::{json, Map, Value};

use super::{Cell, Dataset, OutputFormat, ScenarioConfig};
use crate::error::ScenarioError;

/// Scientific notation with 17 significant digits, enough to round-trip an f64.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv(data: &Dataset) -> String {
    let mut out = data.columns.join(",");
    out.push('\n');
    for row in &data.rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            match cell {
                Cell::Num(v) => out.push_str(&fmt_float(*v)),
                Cell::Bool(b) => {
                    let _ = write!(out, "{b}");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn json(cfg: &ScenarioConfig, data: &Dataset) -> Result<String, serde_json::Error> {
    let rows: Vec<Value> = data
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = data
                .columns
                .iter()
                .zip(row)
                .map(|(name, cell)| (name.to_string(), serde_json::to_value(cell).unwrap_or(Value::Null)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "metadata": {
            "config": cfg,
            "constants": data.summary.constants,
            "death_times": data.summary.death_times,
            "oracle_max_discrepancy": data.summary.oracle_max_discrepancy,
        },
        "rows": rows,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

/// Dataset in the configured format.
pub fn render(cfg: &ScenarioConfig, data: &Dataset) -> Result<String, ScenarioError> {
    match cfg.output_format {
        OutputFormat::Csv => Ok(csv(data)),
        OutputFormat::Json => json(cfg, data)
            .map_err(|e| ScenarioError::Io { path: "<json>".into(), source: std::io::Error::other(e) }),
    }
}

/// Writes the rendered dataset to `output_path`, or to standard output.
pub fn write_output(cfg: &ScenarioConfig, data: &Dataset) -> Result<(), ScenarioError> {
    let text = render(cfg, data)?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| ScenarioError::Io { path: "<stdout>".into(), source })
        }
    }
}

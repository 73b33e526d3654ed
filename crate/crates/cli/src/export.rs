//! `export`: flatten a solution file into one row per antichain point.

use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use serde_json::{json, Value as Json};

use crate::solution::SolutionFile;
use crate::{write_out, ExportFormat};

fn scalar(v: &Json) -> String {
    match v {
        Json::String(s) => s.clone(),
        Json::Array(xs) => xs.iter().map(scalar).collect::<Vec<_>>().join("|"),
        other => other.to_string(),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_export(input: &Path, format: ExportFormat, out: &str) -> Result<ExitCode> {
    let text = std::fs::read_to_string(input)
        .with_context(|| format!("cannot read solution {}", input.display()))?;
    let sol: SolutionFile =
        serde_json::from_str(&text).with_context(|| format!("{}", input.display()))?;

    let fun_cols: Vec<&str> = sol.fun_ports.iter().map(|p| p.name.as_str()).collect();
    let res_cols: Vec<&str> = sol.res_ports.iter().map(|p| p.name.as_str()).collect();
    let impl_cols: Vec<String> = {
        let mut cols: Vec<String> = sol
            .queries
            .iter()
            .flat_map(|q| q.points.iter())
            .flat_map(|p| p.impls.keys().cloned())
            .collect();
        cols.sort();
        cols.dedup();
        cols
    };

    let mut rows: Vec<serde_json::Map<String, Json>> = Vec::new();
    for q in &sol.queries {
        for p in &q.points {
            let mut row = serde_json::Map::new();
            for c in &fun_cols {
                row.insert(format!("fun_{c}"), q.fun.get(*c).cloned().unwrap_or(Json::Null));
            }
            for c in &res_cols {
                row.insert(c.to_string(), p.res.get(*c).cloned().unwrap_or(Json::Null));
            }
            for c in &impl_cols {
                row.insert(
                    format!("impl_{c}"),
                    p.impls.get(c).cloned().unwrap_or(Json::Null),
                );
            }
            rows.push(row);
        }
    }

    let data = match format {
        ExportFormat::Json => format!("{}\n", serde_json::to_string_pretty(&json!(rows))?),
        ExportFormat::Csv => {
            let header: Vec<String> = fun_cols
                .iter()
                .map(|c| format!("fun_{c}"))
                .chain(res_cols.iter().map(|c| c.to_string()))
                .chain(impl_cols.iter().map(|c| format!("impl_{c}")))
                .collect();
            let mut s = header.join(",") + "\n";
            for row in &rows {
                let cells: Vec<String> = header
                    .iter()
                    .map(|h| {
                        row.get(h)
                            .map(|v| csv_escape(&scalar(v)))
                            .unwrap_or_default()
                    })
                    .collect();
                s.push_str(&cells.join(","));
                s.push('\n');
            }
            s
        }
    };
    write_out(out, &data)?;
    eprintln!("{} row(s) exported", rows.len());
    Ok(ExitCode::SUCCESS)
}

//! Benchmark grid specifications given on the command line.
//!
//! Inline form: `k=32,512;n=1000,10000;d=10,100`. Keys may be omitted, in
//! which case the desk-scale default is kept. A file may hold either the
//! inline form or a JSON object with any subset of the grid fields.

use std::path::Path;

use anyhow::{bail, Context, Result};
use bsquant::bench::BenchGrid;

pub fn parse_grid(spec: &str) -> Result<BenchGrid> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading grid file {}", path.display()))?;
        return parse_grid_text(&text).with_context(|| format!("in grid file {}", path.display()));
    }
    parse_grid_text(spec)
}

fn parse_grid_text(text: &str) -> Result<BenchGrid> {
    let text = text.trim();
    if text.starts_with('{') {
        let mut merged = serde_json::to_value(BenchGrid::default())?;
        let overrides: serde_json::Value = serde_json::from_str(text).context("grid JSON")?;
        let Some(fields) = overrides.as_object() else {
            bail!("grid JSON must be an object");
        };
        for (key, value) in fields {
            if merged.get(key).is_none() {
                bail!("unknown grid field {key:?}");
            }
            merged[key] = value.clone();
        }
        return Ok(serde_json::from_value(merged)?);
    }
    let mut grid = BenchGrid::default();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, values)) = part.split_once('=') else {
            bail!("expected key=values, got {part:?}");
        };
        let values = values
            .split(',')
            .map(|v| v.trim().parse::<usize>().with_context(|| format!("bad value {v:?} for {key}")))
            .collect::<Result<Vec<_>>>()?;
        match key.trim() {
            "k" => grid.k_values = values,
            "n" => grid.n_values = values,
            "d" => grid.d_values = values,
            other => bail!("unknown grid key {other:?} (expected k, n or d)"),
        }
    }
    Ok(grid)
}

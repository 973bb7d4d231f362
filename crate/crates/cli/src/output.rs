use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::experiments::{DataTable, Experiment, Outcome};
use crate::CliError;

pub fn write_table(dir: &Path, table: &DataTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", table.name)))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Summary line: experiment name and seed followed by the scalar results.
pub fn summary_record(experiment: Experiment, seed: u64, outcome: &Outcome) -> Value {
    let mut map = Map::new();
    map.insert("experiment".into(), json!(experiment.name()));
    map.insert("seed".into(), json!(seed));
    map.extend(outcome.summary.iter().map(|(k, v)| (k.clone(), v.clone())));
    Value::Object(map)
}

/// Write the manifest, CSV tables, text artifacts and `summary.jsonl`.
pub fn write_run(
    dir: &Path,
    experiment: Experiment,
    cfg: &RunConfig,
    workers: usize,
    wall_seconds: f64,
    outcome: &Outcome,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let manifest = json!({
        "experiment": experiment.name(),
        "seed": cfg.seed,
        "workers": workers,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_seconds": wall_seconds,
        "config": cfg,
    });
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    for table in &outcome.tables {
        write_table(dir, table)?;
    }
    for (name, text) in &outcome.texts {
        fs::write(dir.join(name), text)?;
    }
    let line = serde_json::to_string(&summary_record(experiment, cfg.seed, outcome))?;
    fs::write(dir.join("summary.jsonl"), line + "\n")?;
    Ok(())
}

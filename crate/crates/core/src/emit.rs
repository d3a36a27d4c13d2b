//! Writing experiment results: CSV records, JSON with the resolved spec,
//! and per-run trace files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::{ExperimentSpec, Record, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// JSON document: the spec that produced the records, then the records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub spec: ExperimentSpec,
    pub records: Vec<Record>,
}

pub fn write_csv<W: Write>(out: W, records: &[Record]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "sweep_name",
        "sweep_value",
        "mode",
        "drop",
        "ee_bits_per_joule",
        "outage_prob",
        "offload_prob",
        "iters",
        "seconds",
    ])?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(text: &str) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_json<W: Write>(out: W, spec: &ExperimentSpec, records: &[Record]) -> Result<()> {
    let report = JsonReport {
        spec: spec.clone(),
        records: records.to_vec(),
    };
    serde_json::to_writer_pretty(out, &report)?;
    Ok(())
}

pub fn read_json(text: &str) -> Result<JsonReport> {
    Ok(serde_json::from_str(text)?)
}

/// Writes `<name>.csv` or `<name>.json` into `dir`; returns the path.
pub fn emit(dir: &Path, spec: &ExperimentSpec, records: &[Record], format: Format) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = match format {
        Format::Csv => dir.join(format!("{}.csv", spec.name)),
        Format::Json => dir.join(format!("{}.json", spec.name)),
    };
    let file = std::io::BufWriter::new(fs::File::create(&path)?);
    match format {
        Format::Csv => write_csv(file, records)?,
        Format::Json => write_json(file, spec, records)?,
    }
    Ok(path)
}

/// One `(iteration, value)` CSV per run under `dir/traces`.
pub fn emit_traces(dir: &Path, traces: &[Trace]) -> Result<Vec<PathBuf>> {
    let tdir = dir.join("traces");
    fs::create_dir_all(&tdir)?;
    let mut paths = Vec::with_capacity(traces.len());
    for t in traces {
        let path = tdir.join(format!("{}_{}_drop{}.csv", t.mode, t.sweep_value, t.drop));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["iteration", "value"])?;
        for (i, v) in t.values.iter().enumerate() {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

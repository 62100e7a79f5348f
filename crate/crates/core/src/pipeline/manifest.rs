//! JSON-lines manifest: one header line with the toolkit version and the
//! resolved config, then one line per sample in index order. Keys are
//! sorted so identical runs produce identical bytes.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PairedSample, PipelineConfig, PipelineError, SampleFailure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub kind: String,
    pub version: String,
    pub config: PipelineConfig,
}

impl ManifestHeader {
    pub fn new(config: &PipelineConfig) -> Self {
        Self { kind: "header".into(), version: crate::VERSION.into(), config: config.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ManifestEntry {
    Ok(PairedSample),
    Failed(SampleFailure),
}

impl ManifestEntry {
    pub fn index(&self) -> usize {
        match self {
            ManifestEntry::Ok(s) => s.index,
            ManifestEntry::Failed(f) => f.index,
        }
    }
}

fn sorted_line<T: Serialize>(value: &T) -> Result<String, PipelineError> {
    // `Value` objects are BTreeMap-backed, which sorts keys at every level.
    let v = serde_json::to_value(value).map_err(|e| PipelineError::Manifest(e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| PipelineError::Manifest(e.to_string()))
}

pub fn write_manifest(header: &ManifestHeader, entries: &[ManifestEntry], path: &Path) -> Result<(), PipelineError> {
    let mut out = BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", sorted_line(header)?)?;
    let mut ordered: Vec<&ManifestEntry> = entries.iter().collect();
    ordered.sort_by_key(|e| e.index());
    for entry in ordered {
        writeln!(out, "{}", sorted_line(entry)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<(ManifestHeader, Vec<ManifestEntry>), PipelineError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let first = lines.next().ok_or_else(|| PipelineError::Manifest("empty manifest".into()))??;
    let header: ManifestHeader =
        serde_json::from_str(&first).map_err(|e| PipelineError::Manifest(format!("header: {e}")))?;
    let mut entries = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let entry = serde_json::from_str(&line).map_err(|e| PipelineError::Manifest(format!("line {}: {e}", n + 2)))?;
        entries.push(entry);
    }
    Ok((header, entries))
}

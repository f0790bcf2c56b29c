//! Sweep tables on disk: a CSV table plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use super::{SweepMetadata, SweepPoint, SweepResult};
use crate::error::{Result, RpeError};

pub const SCHEMA_VERSION: &str = "rpe-sweep-v1";

const COLUMNS: [&str; 9] = [
    "axis_name",
    "axis_value",
    "secondary_axis_value",
    "trials",
    "failures",
    "failure_rate",
    "ci_low",
    "ci_high",
    "predicted_delta",
];

/// `foo.csv` → `foo.meta.json`.
pub fn sidecar_path(table: &Path) -> PathBuf {
    table.with_extension("meta.json")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RpeError + '_ {
    move |source| RpeError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn schema_err(path: &Path, message: impl std::fmt::Display) -> RpeError {
    RpeError::Schema {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

pub fn persist(result: &SweepResult, path: &Path) -> Result<()> {
    if result.points.is_empty() {
        return Err(RpeError::InvalidArgument(
            "refusing to persist a sweep with no points".into(),
        ));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    for p in &result.points {
        writer.serialize(p).map_err(|e| schema_err(path, e))?;
    }
    let table = writer.into_inner().map_err(|e| schema_err(path, e))?;
    fs::write(path, table).map_err(io_err(path))?;

    let meta_path = sidecar_path(path);
    let mut meta =
        serde_json::to_string_pretty(&result.metadata).map_err(|e| schema_err(&meta_path, e))?;
    meta.push('\n');
    fs::write(&meta_path, meta).map_err(io_err(&meta_path))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<SweepResult> {
    let meta_path = sidecar_path(path);
    let meta_text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let metadata: SweepMetadata =
        serde_json::from_str(&meta_text).map_err(|e| schema_err(&meta_path, e))?;
    if metadata.schema != SCHEMA_VERSION {
        return Err(schema_err(
            &meta_path,
            format!(
                "expected schema {SCHEMA_VERSION}, found {}",
                metadata.schema
            ),
        ));
    }

    let table = fs::read(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(table.as_slice());
    let header = reader.headers().map_err(|e| schema_err(path, e))?;
    if header.iter().ne(COLUMNS) {
        return Err(schema_err(
            path,
            format!(
                "expected columns {:?}, found {:?}",
                COLUMNS,
                header.iter().collect::<Vec<_>>()
            ),
        ));
    }
    let mut points = Vec::new();
    for (row, rec) in reader.deserialize::<SweepPoint>().enumerate() {
        let p = rec.map_err(|e| schema_err(path, format!("row {}: {e}", row + 1)))?;
        if p.failures > p.trials
            || !(0.0..=1.0).contains(&p.ci_low)
            || !(0.0..=1.0).contains(&p.ci_high)
        {
            return Err(schema_err(
                path,
                format!("row {}: inconsistent counts or interval", row + 1),
            ));
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(schema_err(path, "table has no rows"));
    }
    Ok(SweepResult { points, metadata })
}

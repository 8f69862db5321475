use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::model::{Field, Grid1D};
use crate::solver::HistoryRow;

/// One line of a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotLine {
    pub t: f64,
    pub values: Vec<f64>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| HarnessError::io(path, e))
}

fn finish(path: &Path, w: BufWriter<File>) -> Result<(), HarnessError> {
    w.into_inner()
        .map_err(|e| HarnessError::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| HarnessError::io(path, e))
}

pub fn write_snapshots_ndjson(path: &Path, snapshots: &[Field]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    for s in snapshots {
        let line = SnapshotLine {
            t: s.time(),
            values: s.values().to_vec(),
        };
        serde_json::to_writer(&mut w, &line).map_err(|e| HarnessError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    }
    finish(path, w)
}

/// Snapshots on `grid`; blank lines are skipped.
pub fn read_snapshots_ndjson(path: &Path, grid: &Grid1D) -> Result<Vec<Field>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| HarnessError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: SnapshotLine = serde_json::from_str(&line)
            .map_err(|e| HarnessError::Config(format!("{}:{}: {e}", path.display(), k + 1)))?;
        out.push(Field::new(grid.clone(), s.values, s.t)?);
    }
    Ok(out)
}

/// `t,sup_u,inf_u,dt` per accepted step.
pub fn write_summary_csv(path: &Path, rows: &[HistoryRow]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    writeln!(w, "t,sup_u,inf_u,dt").map_err(io)?;
    for r in rows {
        writeln!(w, "{},{},{},{}", fmt17(r.t), fmt17(r.sup_u), fmt17(r.inf_u), fmt17(r.dt)).map_err(io)?;
    }
    finish(path, w)
}

/// Long-format `t,x,u` rows for plotting.
pub fn write_profile_csv(path: &Path, snapshots: &[Field]) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    let io = |e| HarnessError::io(path, e);
    writeln!(w, "t,x,u").map_err(io)?;
    for s in snapshots {
        let t = fmt17(s.time());
        for (x, u) in s.grid().nodes().zip(s.values()) {
            writeln!(w, "{t},{},{}", fmt17(x), fmt17(*u)).map_err(io)?;
        }
    }
    finish(path, w)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| HarnessError::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| HarnessError::io(path, e))?;
    finish(path, w)
}

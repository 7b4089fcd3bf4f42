//! CSV and JSON writers for traces, regret curves and reports.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::monte_carlo::CurvePoint;
use crate::error::{LbError, Result};
use crate::game::RunTrace;

fn io_err(path: &Path, e: impl std::fmt::Display) -> LbError {
    LbError::Io(format!("{}: {e}", path.display()))
}

/// Columns `t, action, realized_loss, p_1..p_N, regret`; rounds and
/// actions are 1-based.
pub fn write_trace_csv(path: &Path, trace: &RunTrace) -> Result<()> {
    let n = trace.rounds.first().map_or(0, |r| r.distribution.len());
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    let mut header = vec!["t".to_string(), "action".into(), "realized_loss".into()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.push("regret".into());
    w.write_record(&header).map_err(|e| io_err(path, e))?;
    for (t, r) in trace.rounds.iter().enumerate() {
        let mut row = vec![(t + 1).to_string(), (r.chosen + 1).to_string(), r.realized_loss.to_string()];
        row.extend(r.distribution.iter().map(f64::to_string));
        row.push(r.regret.to_string());
        w.write_record(&row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Columns `round, mean_regret, stderr, bound`; a missing stderr is left empty.
pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(["round", "mean_regret", "stderr", "bound"]).map_err(|e| io_err(path, e))?;
    for p in curve {
        w.write_record([
            p.round.to_string(),
            p.mean_regret.to_string(),
            p.stderr.map(|s| s.to_string()).unwrap_or_default(),
            p.bound.to_string(),
        ])
        .map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| io_err(path, e))?;
    w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

//! CSV output: UTF-8, `.` decimal separator, 17 significant digits for
//! reals so every value round-trips exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use proxgen_core::diagnostics::RunRecord;

use crate::CliError;

/// 17 significant digits; round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub const RECORD_HEADER: &str = "t,objective,stationarity_bound,sparsity,support_precision,support_recall,support_f1,momentum_norm,grad_norm,max_grad_norm,grad_variance,c4_min_eig,step_norm";

pub fn record_row(r: &RunRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.t,
        fmt_f64(r.objective),
        fmt_f64(r.stationarity_bound),
        fmt_f64(r.sparsity),
        fmt_opt_f64(r.support_precision),
        fmt_opt_f64(r.support_recall),
        fmt_opt_f64(r.support_f1),
        fmt_f64(r.momentum_norm),
        fmt_f64(r.grad_norm),
        fmt_f64(r.max_grad_norm),
        fmt_f64(r.grad_variance),
        fmt_f64(r.c4_min_eig),
        fmt_f64(r.step_norm),
    )
}

pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<(), CliError> {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&record_row(r));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

/// Writes a summary CSV: a `#`-prefixed timestamp line (excluded from
/// byte-level determinism comparisons), a header, then the rows.
pub fn write_summary(path: &Path, header: &str, rows: &[String]) -> Result<(), CliError> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(f, "# generated_at_unix={stamp}").map_err(|e| CliError::io(path, e))?;
    writeln!(f, "{header}").map_err(|e| CliError::io(path, e))?;
    for row in rows {
        writeln!(f, "{row}").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

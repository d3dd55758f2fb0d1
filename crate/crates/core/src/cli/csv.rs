use std::fmt::Write as _;
use std::path::Path;

use super::{CliError, ConvergenceTable};

pub const CSV_HEADER: &str = "n,h,L2,L2_order,H1,H1_order";

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.5e}")).unwrap_or_default()
}

pub fn format_csv(table: &ConvergenceTable) -> Result<String, CliError> {
    if table.rows.is_empty() {
        return Err(CliError::EmptyTable);
    }
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{:.5e},{},{:.5e},{}",
            r.n,
            r.h,
            r.err_l2,
            opt(r.order_l2),
            r.err_h1,
            opt(r.order_h1)
        );
    }
    Ok(out)
}

/// Nothing is written when the table is empty.
pub fn export_csv(table: &ConvergenceTable, path: &Path) -> Result<(), CliError> {
    let text = format_csv(table)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

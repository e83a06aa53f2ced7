//! Result tables and plot-data emission.

use crate::experiment::RunRecord;
use crate::{HarnessError, VERSION};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Aligned text table plus a comma-separated file.
    Table,
    /// Two two-column series (model index vs MSE, model index vs hours).
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "plotdata" => Ok(ReportFormat::PlotData),
            other => Err(format!("unknown format `{other}` (expected table|plotdata)")),
        }
    }
}

/// Renders `records` sorted by parameter count. Returns the paths written.
pub fn report(
    records: &[RunRecord],
    format: ReportFormat,
    out_stem: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Usage("no records to report".into()));
    }
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.parameters);

    let mut written = Vec::new();
    match format {
        ReportFormat::Table => {
            let txt_path = out_stem.with_extension("txt");
            std::fs::write(&txt_path, render_text_table(&sorted))?;
            written.push(txt_path);

            let csv_path = out_stem.with_extension("csv");
            let mut csv = format!("# pricenet v{VERSION}\n{}\n", RunRecord::CSV_HEADER);
            for r in &sorted {
                csv.push_str(&r.to_csv_row());
                csv.push('\n');
            }
            std::fs::write(&csv_path, csv)?;
            written.push(csv_path);
        }
        ReportFormat::PlotData => {
            let stem = out_stem.to_string_lossy();
            let mse_path = PathBuf::from(format!("{stem}_mse.dat"));
            let time_path = PathBuf::from(format!("{stem}_time.dat"));
            let mut mse = format!("# pricenet v{VERSION}: model index (by parameter count) vs test MSE\n");
            let mut time = format!("# pricenet v{VERSION}: model index (by parameter count) vs training hours\n");
            for (i, r) in sorted.iter().enumerate() {
                mse.push_str(&format!("{} {:.16e}\n", i + 1, r.test_mse));
                time.push_str(&format!("{} {:.6}\n", i + 1, r.hours()));
            }
            std::fs::write(&mse_path, mse)?;
            written.push(mse_path);
            std::fs::write(&time_path, time)?;
            written.push(time_path);
        }
    }
    Ok(written)
}

/// Aligned text table in the result-table column layout.
pub fn render_text_table(sorted: &[&RunRecord]) -> String {
    let headers = ["Model", "Layers", "Nodes", "Parameters", "Training Time (H)", "MSE"];
    let rows: Vec<[String; 6]> = sorted
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                r.layers.to_string(),
                r.nodes.to_string(),
                group_thousands(r.parameters),
                format!("{:.2}", r.hours()),
                format!("{:.1e}", r.test_mse),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: &[String]| -> String {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}", w = w))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&fmt_row(&headers.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in &rows {
        out.push_str(&fmt_row(row));
        out.push('\n');
    }
    out
}

fn group_thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Reads a records CSV produced by [`report`] (comment lines ignored).
pub fn parse_records_csv(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == RunRecord::CSV_HEADER {
            continue;
        }
        records.push(RunRecord::from_csv_row(line)?);
    }
    if records.is_empty() {
        return Err(HarnessError::Config(format!(
            "no records found in {}",
            path.display()
        )));
    }
    Ok(records)
}

use std::fmt::Write as _;
use std::str::FromStr;

use super::ResultTable;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputMode {
    /// Space-padded columns.
    #[default]
    Table,
    /// One tab-separated line per row; tabs, newlines and backslashes escaped.
    Tsv,
}

impl FromStr for OutputMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(OutputMode::Table),
            "tsv" => Ok(OutputMode::Tsv),
            other => Err(format!(
                "unknown output mode {other:?} (expected table or tsv)"
            )),
        }
    }
}

fn tsv_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('\t', "\\t")
        .replace('\n', "\\n")
        .replace('\r', "\\r")
}

/// Header line followed by one line per row. Cells use the short term form:
/// home-namespace IRIs without the `:` and literals by lexical value.
pub fn format_results(rt: &ResultTable, mode: OutputMode) -> String {
    let header: Vec<String> = rt.header.iter().map(|v| v.name().to_owned()).collect();
    let rows: Vec<Vec<String>> = rt
        .rows
        .iter()
        .map(|r| r.iter().map(|t| t.short().to_owned()).collect())
        .collect();
    let mut out = String::new();
    match mode {
        OutputMode::Tsv => {
            for line in std::iter::once(&header).chain(&rows) {
                let cells: Vec<String> = line.iter().map(|c| tsv_escape(c)).collect();
                let _ = writeln!(out, "{}", cells.join("\t"));
            }
        }
        OutputMode::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
            for row in &rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            for line in std::iter::once(&header).chain(&rows) {
                let mut text = String::new();
                for (i, (cell, w)) in line.iter().zip(&widths).enumerate() {
                    if i > 0 {
                        text.push_str("  ");
                    }
                    let _ = write!(text, "{cell:<w$}");
                }
                let _ = writeln!(out, "{}", text.trim_end());
            }
        }
    }
    out
}

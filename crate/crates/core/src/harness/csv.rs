//! Regret curves as CSV with a `# key=value` header.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::aggregate::AggregateTrace;

pub const COLUMNS: [&str; 5] = ["t", "mean_regret", "std_regret", "explore_count_mean", "exploit_count_mean"];

pub fn write_csv_to<W: Write>(trace: &AggregateTrace, mut w: W) -> io::Result<()> {
    for (k, v) in &trace.metadata {
        writeln!(w, "# {k}={v}")?;
    }
    writeln!(w, "{}", COLUMNS.join(","))?;
    for i in 0..trace.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            trace.t[i], trace.mean_regret[i], trace.std_regret[i], trace.explore_count_mean[i], trace.exploit_count_mean[i]
        )?;
    }
    w.flush()
}

pub fn write_csv(trace: &AggregateTrace, path: &Path) -> Result<()> {
    write_csv_to(trace, BufWriter::new(File::create(path)?))?;
    Ok(())
}

/// Parsed CSV: header pairs and numeric rows in column order.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<(String, String)>,
    pub rows: Vec<[f64; 5]>,
}

impl CsvTable {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_csv_from<R: BufRead>(r: R) -> Result<CsvTable> {
    let mut table = CsvTable { header: Vec::new(), rows: Vec::new() };
    let mut seen_columns = false;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h.split_once('=').ok_or_else(|| Error::Parse { line: n, message: "header without `=`".into() })?;
            table.header.push((k.to_string(), v.to_string()));
        } else if !seen_columns {
            if line != COLUMNS.join(",") {
                return Err(Error::Parse { line: n, message: format!("unexpected columns `{line}`") });
            }
            seen_columns = true;
        } else {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse { line: n, message: e.to_string() })?;
            let row: [f64; 5] = vals
                .try_into()
                .map_err(|_| Error::Parse { line: n, message: "expected 5 fields".into() })?;
            table.rows.push(row);
        }
    }
    Ok(table)
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    read_csv_from(BufReader::new(File::open(path)?))
}

//! Comma-separated time series with a header row.

use std::path::Path;

use super::format::fmt_sig;
use crate::coupling::TimeSeries;
use crate::error::{Error, Result};

const DIGITS: usize = 12;

pub fn timeseries_csv_string(ts: &TimeSeries) -> String {
    let mut s = ts.columns.join(",");
    s.push('\n');
    for row in &ts.rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_sig(*v, DIGITS)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_timeseries_csv(ts: &TimeSeries, path: &Path) -> Result<()> {
    std::fs::write(path, timeseries_csv_string(ts)).map_err(|e| Error::io(path, e))
}

/// Reads back the writer's dialect.
pub fn parse_timeseries_csv(text: &str) -> Result<TimeSeries> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Parse { line: 1, message: "missing header".into() })?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: k + 2, message: e.to_string() })?;
        if row.len() != columns.len() {
            return Err(Error::Parse { line: k + 2, message: format!("{} cells for {} columns", row.len(), columns.len()) });
        }
        rows.push(row);
    }
    Ok(TimeSeries { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_header_only() {
        let ts = TimeSeries { columns: vec!["t".into(), "z_tip".into()], rows: vec![] };
        assert_eq!(timeseries_csv_string(&ts), "t,z_tip\n");
    }

    #[test]
    fn parse_back_matches() {
        let ts = TimeSeries {
            columns: vec!["t".into(), "a".into()],
            rows: vec![vec![0.0, 1.0 / 3.0], vec![0.01, -2.718281828459045e-7]],
        };
        let back = parse_timeseries_csv(&timeseries_csv_string(&ts)).unwrap();
        assert_eq!(back.columns, ts.columns);
        for (r, s) in back.rows.iter().zip(&ts.rows) {
            for (a, b) in r.iter().zip(s) {
                assert!((a - b).abs() <= 5e-12 * b.abs());
            }
        }
    }
}

//! Predictor, response and table CSV files.
//!
//! Predictors: one function per row, one column per grid point, with an
//! optional `t_0,…,t_{n-1}` header. Responses: a single column aligned with
//! the predictor rows, with an optional non-numeric header.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use efrm_core::{DiscretizedFunction, Grid};

use crate::error::{CliError, CliResult};

/// Formats with 17 significant digits so values round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NA".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

fn record_line(r: &csv::StringRecord) -> Option<u64> {
    r.position().map(|p| p.line())
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::parse(path, line, format!("{other:?}")),
    }
}

fn parse_row(path: &Path, r: &csv::StringRecord) -> CliResult<Vec<f64>> {
    r.iter()
        .enumerate()
        .map(|(col, s)| {
            s.parse::<f64>().map_err(|_| {
                CliError::parse(path, record_line(r), format!("column {}: {s:?} is not a number", col + 1))
            })
        })
        .collect()
}

fn is_header(r: &csv::StringRecord) -> bool {
    r.iter()
        .next()
        .is_some_and(|s| !s.is_empty() && s.parse::<f64>().is_err())
}

/// Raw predictor rows; every row must have the same length.
pub fn read_predictor_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && is_header(&rec) {
            continue;
        }
        let row = parse_row(path, &rec)?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::parse(
                    path,
                    record_line(&rec),
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Predictor functions on the grid implied by the column count.
pub fn read_predictors(path: &Path) -> CliResult<Vec<DiscretizedFunction>> {
    let rows = read_predictor_rows(path)?;
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let grid = Grid::new(first.len())
        .map_err(|e| CliError::parse(path, Some(1), e.to_string()))?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            DiscretizedFunction::new(grid, r)
                .map_err(|e| CliError::parse(path, Some(i as u64 + 1), e.to_string()))
        })
        .collect()
}

pub fn read_responses(path: &Path) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if i == 0 && is_header(&rec) {
            continue;
        }
        if rec.len() != 1 {
            return Err(CliError::parse(
                path,
                record_line(&rec),
                format!("expected a single column, found {}", rec.len()),
            ));
        }
        out.push(parse_row(path, &rec)?[0]);
    }
    Ok(out)
}

/// Writes a CSV file from a header and string rows.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e: csv::Error| csv_error(path, e);
    w.write_record(header).map_err(wrap)?;
    for r in rows {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One function per row with a `t_k` header.
pub fn write_functions(path: &Path, fs: &[Vec<f64>], n_points: usize) -> CliResult<()> {
    let header: Vec<String> = (0..n_points).map(|k| format!("t_{k}")).collect();
    let rows: Vec<Vec<String>> = fs
        .iter()
        .map(|f| f.iter().copied().map(fmt_f64).collect())
        .collect();
    write_table(path, &header, &rows)
}

/// A single named column.
pub fn write_column(path: &Path, name: &str, values: &[f64]) -> CliResult<()> {
    let rows: Vec<Vec<String>> = values.iter().map(|v| vec![fmt_f64(*v)]).collect();
    write_table(path, &[name.to_string()], &rows)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "NA");
    }

    #[test]
    fn reads_with_and_without_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        write_text(&p, "t_0,t_1,t_2\n1,2,3\n4,5,6\n").unwrap();
        assert_eq!(read_predictor_rows(&p).unwrap(), vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        write_text(&p, "1,2,3\n4,5,6\n").unwrap();
        assert_eq!(read_predictor_rows(&p).unwrap().len(), 2);
        write_text(&p, "1,2,3\n4,5\n").unwrap();
        let err = read_predictor_rows(&p).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: Some(2), .. }), "{err}");
        write_text(&p, "1,2,3\n4,x,6\n").unwrap();
        assert!(matches!(read_predictor_rows(&p), Err(CliError::Parse { line: Some(2), .. })));

        let r = dir.path().join("y.csv");
        write_text(&r, "y\n1.5\n-2\n").unwrap();
        assert_eq!(read_responses(&r).unwrap(), vec![1.5, -2.0]);
        write_text(&r, "").unwrap();
        assert!(read_responses(&r).unwrap().is_empty());
    }
}

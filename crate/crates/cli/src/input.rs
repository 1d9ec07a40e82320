//! Numeric CSV input for `estimate`.

use std::path::Path;

use sparse_fdr::nalgebra::{DMatrix, DVector};
use sparse_fdr::{Error, Result, SparseVector};

/// Rows of a numeric CSV, each tagged with its 1-based line number. A first
/// row with no numeric field is taken as a header and skipped; `#` starts a
/// comment line.
fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let text = std::fs::read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rows.is_empty() && record.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let mut values = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{field}` is not a number", col + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: value must be finite", col + 1),
                });
            }
            values.push(v);
        }
        rows.push((line, values));
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no data rows".into(),
        });
    }
    Ok(rows)
}

/// One value of `y` per row.
pub fn read_means(path: &Path) -> Result<SparseVector> {
    let rows = read_rows(path)?;
    let mut y = Vec::with_capacity(rows.len());
    for (line, values) in rows {
        if values.len() != 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected 1 column for the means model, found {}", values.len()),
            });
        }
        y.push(values[0]);
    }
    SparseVector::new(y)
}

/// Rows `x_1, ..., x_p, y`.
pub fn read_regression(path: &Path) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let rows = read_rows(path)?;
    let width = rows[0].1.len();
    if width < 2 {
        return Err(Error::Parse {
            line: rows[0].0,
            message: "regression input needs at least one design column and y".into(),
        });
    }
    for (line, values) in &rows {
        if values.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {width} columns, found {}", values.len()),
            });
        }
    }
    let n = rows.len();
    let x = DMatrix::from_fn(n, width - 1, |i, j| rows[i].1[j]);
    let y = DVector::from_fn(n, |i, _| rows[i].1[width - 1]);
    Ok((x, y))
}

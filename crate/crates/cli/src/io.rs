//! Matrix and vector file I/O: CSV (rows as lines, comma-separated
//! decimals) and JSON (`{"n": columns, "rows": [[...]]}`), plus the SVG
//! polygon emitter for image-boundary plots.
//!
//! Decimal serialization uses 17 significant digits, which round-trips
//! `f64` exactly; the JSON path relies on `serde_json`'s shortest-exact
//! float printing for the same guarantee.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::Failure;

#[derive(Serialize, Deserialize)]
struct JsonMatrix {
    n: usize,
    rows: Vec<Vec<f64>>,
}

fn parse_csv_rows(text: &str, path: &Path) -> Result<Vec<Vec<f64>>, Failure> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let field = field.trim();
            let value: f64 = field.parse().map_err(|_| {
                Failure::usage(format!(
                    "{}:{}: cannot parse `{field}` as a number",
                    path.display(),
                    lineno + 1
                ))
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read a rectangular matrix: rows as CSV lines, or a JSON object when the
/// file starts with `{`.  Validates finiteness and consistent row lengths.
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let rows = if text.trim_start().starts_with('{') {
        let parsed: JsonMatrix = serde_json::from_str(&text)
            .map_err(|e| Failure::usage(format!("{}: invalid JSON matrix: {e}", path.display())))?;
        for row in &parsed.rows {
            if row.len() != parsed.n {
                return Err(Failure::usage(format!(
                    "{}: row length {} does not match n = {}",
                    path.display(),
                    row.len(),
                    parsed.n
                )));
            }
        }
        parsed.rows
    } else {
        parse_csv_rows(&text, path)?
    };
    if rows.is_empty() {
        return Err(Failure::usage(format!("{}: no rows", path.display())));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Failure::usage(format!(
            "{}: rows must be nonempty and of equal length",
            path.display()
        )));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Failure::usage(format!(
            "{}: entries must be finite",
            path.display()
        )));
    }
    let nrows = rows.len();
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Read a square matrix, rejecting rectangular input with a clear message.
pub fn read_square_matrix(path: &Path) -> Result<DMatrix<f64>, Failure> {
    let m = read_matrix(path)?;
    if !m.is_square() {
        return Err(Failure::usage(format!(
            "{}: expected a square matrix, got {}×{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

/// Read a vector: a single CSV line, a single column, or a one-row JSON
/// matrix.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, Failure> {
    let m = read_matrix(path)?;
    if m.nrows() != 1 && m.ncols() != 1 {
        return Err(Failure::usage(format!(
            "{}: expected a vector (one row or one column), got {}×{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.iter().copied().collect())
}

/// Rows of a matrix as nested vectors, for embedding in the JSON report.
pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Serialize one row as CSV with 17 significant digits.
fn csv_line(row: &[f64]) -> String {
    row.iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Write a matrix to `path`: JSON when the extension is `.json`, CSV
/// otherwise.  Both formats round-trip through [`read_matrix`] exactly.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<(), Failure> {
    let text = if path.extension().is_some_and(|e| e == "json") {
        let body = JsonMatrix {
            n: m.ncols(),
            rows: matrix_rows(m),
        };
        serde_json::to_string(&body).expect("matrix serializes") + "\n"
    } else {
        let mut out = String::new();
        for row in matrix_rows(m) {
            out.push_str(&csv_line(&row));
            out.push('\n');
        }
        out
    };
    std::fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Planar points as CSV lines `x1,x2`.
pub fn points_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::new();
    for &(x, y) in points {
        out.push_str(&csv_line(&[x, y]));
        out.push('\n');
    }
    out
}

/// A standalone SVG of the point list as one closed polygon in a fixed
/// 512×512 viewBox, data bounding box padded by 5%, y-axis flipped to
/// mathematical orientation.
pub fn points_svg(points: &[(f64, f64)]) -> String {
    const SIZE: f64 = 512.0;
    let (mut lo_x, mut hi_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        lo_x = lo_x.min(x);
        hi_x = hi_x.max(x);
        lo_y = lo_y.min(y);
        hi_y = hi_y.max(y);
    }
    // Degenerate spans (single point, segment) still get a visible frame.
    let span = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let pad = 0.05 * span;
    let scale = SIZE / (span + 2.0 * pad);
    let project = |x: f64, y: f64| {
        let px = (x - lo_x + pad) * scale;
        let py = SIZE - (y - lo_y + pad) * scale;
        (px, py)
    };
    let coords = points
        .iter()
        .map(|&(x, y)| {
            let (px, py) = project(x, y);
            format!("{px:.3},{py:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ");
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 512 512\" \
         width=\"512\" height=\"512\">\n\
         <polygon points=\"{coords}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n\
         </svg>\n"
    )
}

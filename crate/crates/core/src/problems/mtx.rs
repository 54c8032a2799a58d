//! Reader for real MatrixMarket files (`coordinate` or `array`,
//! `general` or `symmetric`), returning a dense matrix.

use std::path::Path;

use crate::error::{Error, Result};
use crate::mat::Mat;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

pub fn read_matrix_market(path: &Path) -> Result<Mat> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<Mat> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty MatrixMarket input".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad MatrixMarket header: {header}")));
    }
    let layout = match tokens[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(Error::Parse(format!("unsupported layout {other}"))),
    };
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(Error::Parse(format!("unsupported field {}", tokens[3])));
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(Error::Parse(format!("unsupported symmetry {other}"))),
    };

    let mut body = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;

    let num = |t: &str| -> Result<f64> {
        t.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {t}")))
    };

    match layout {
        Layout::Coordinate => {
            let [rows, cols, nnz] = dims[..] else {
                return Err(Error::Parse("coordinate size line needs rows cols nnz".into()));
            };
            let mut m = Mat::zeros(rows, cols);
            let mut seen = 0;
            for line in body {
                let t: Vec<&str> = line.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(Error::Parse(format!("bad entry line: {line}")));
                }
                let i: usize = t[0].parse().map_err(|_| Error::Parse(format!("bad row {}", t[0])))?;
                let j: usize = t[1].parse().map_err(|_| Error::Parse(format!("bad col {}", t[1])))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("entry ({i}, {j}) out of range")));
                }
                let v = num(t[2])?;
                m[(i - 1, j - 1)] = v;
                if symmetry == Symmetry::Symmetric {
                    m[(j - 1, i - 1)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
            }
            Ok(m)
        }
        Layout::Array => {
            let [rows, cols] = dims[..] else {
                return Err(Error::Parse("array size line needs rows cols".into()));
            };
            let values: Vec<f64> = body
                .flat_map(str::split_whitespace)
                .map(num)
                .collect::<Result<_>>()?;
            let mut m = Mat::zeros(rows, cols);
            match symmetry {
                Symmetry::General => {
                    if values.len() != rows * cols {
                        return Err(Error::Parse("array entry count mismatch".into()));
                    }
                    m.as_mut_slice().copy_from_slice(&values);
                }
                Symmetry::Symmetric => {
                    if rows != cols || values.len() != rows * (rows + 1) / 2 {
                        return Err(Error::Parse("symmetric array entry count mismatch".into()));
                    }
                    // Column-major lower triangle.
                    let mut it = values.into_iter();
                    for j in 0..cols {
                        for i in j..rows {
                            let v = it.next().expect("count checked above");
                            m[(i, j)] = v;
                            m[(j, i)] = v;
                        }
                    }
                }
            }
            Ok(m)
        }
    }
}

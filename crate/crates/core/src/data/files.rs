use std::fs;
use std::io::{self, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{MisreError, Result};
use crate::model::{CovarianceBasis, InputPoint};

fn parse_error(line: u64, message: impl Into<String>) -> MisreError {
    MisreError::Parse { line, message: message.into() }
}

/// Parses CSV rows of `dim` numbers. A non-numeric first row is taken as a
/// header; `#` starts a comment line.
pub fn parse_csv(text: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let values: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match values {
            Ok(v) => v,
            Err(_) if k == 0 && record.iter().all(|f| f.parse::<f64>().is_err()) => continue,
            Err(_) => return Err(parse_error(line, "malformed number")),
        };
        if values.len() != dim {
            return Err(MisreError::InvalidInput(format!(
                "line {line}: expected {dim} values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(line, "non-finite value"));
        }
        rows.push(values);
    }
    Ok(rows)
}

/// Parses an ascii PLY file and returns the vertex `x, y, z` coordinates in
/// declaration order.
pub fn parse_ply(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i as u64 + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(parse_error(1, "missing 'ply' magic")),
    }
    let mut vertex_count = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex = false;
    let mut skip_elements: Vec<(usize, usize)> = Vec::new();
    loop {
        let (ln, line) = lines.next().ok_or_else(|| parse_error(0, "unterminated header"))?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => return Err(parse_error(ln, format!("unsupported PLY format '{other}'"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count: usize = count.parse().map_err(|_| parse_error(ln, "bad element count"))?;
                in_vertex = *name == "vertex";
                if in_vertex {
                    vertex_count = Some(count);
                } else if vertex_count.is_none() {
                    skip_elements.push((count, 0));
                }
            }
            ["property", "list", ..] if in_vertex => {
                return Err(parse_error(ln, "list properties on vertices are not supported"))
            }
            ["property", .., name] => {
                if in_vertex {
                    properties.push(name.to_string());
                } else if let Some(last) = skip_elements.last_mut() {
                    last.1 += 1;
                }
            }
            ["end_header"] => break,
            _ => return Err(parse_error(ln, format!("unexpected header line '{line}'"))),
        }
    }
    let count = vertex_count.ok_or_else(|| parse_error(0, "no vertex element"))?;
    let index_of = |axis: &str| {
        properties
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| MisreError::InvalidInput(format!("vertex property '{axis}' missing")))
    };
    let (ix, iy, iz) = (index_of("x")?, index_of("y")?, index_of("z")?);
    for (n, _) in &skip_elements {
        for _ in 0..*n {
            lines.next().ok_or_else(|| parse_error(0, "truncated element data"))?;
        }
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, line) = lines.next().ok_or_else(|| parse_error(0, "fewer vertices than declared"))?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|w| w.parse::<f64>().map_err(|_| parse_error(ln, "malformed number")))
            .collect::<Result<_>>()?;
        if values.len() < properties.len() {
            return Err(parse_error(ln, "vertex row is too short"));
        }
        points.push(vec![values[ix], values[iy], values[iz]]);
    }
    Ok(points)
}

fn is_ply(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("ply"))
}

/// Reads `dim`-dimensional points from CSV, or from ascii PLY when the
/// extension is `.ply`.
pub fn read_points(path: &Path, dim: usize) -> Result<Vec<InputPoint>> {
    let text = fs::read_to_string(path)?;
    let rows = if is_ply(path) {
        if dim != 3 {
            return Err(MisreError::InvalidInput(format!("PLY files hold 3D points, {dim}D requested")));
        }
        parse_ply(&text)?
    } else {
        parse_csv(&text, dim)?
    };
    Ok(rows.into_iter().map(InputPoint::new).collect())
}

/// Reads `x, y, x', y'` correspondences.
pub fn read_correspondences(path: &Path) -> Result<Vec<InputPoint>> {
    read_points(path, 4)
}

/// Reads covariance bases of `dim × dim`, one row-major matrix per CSV row:
/// a single row is shared by all `n` points.
pub fn read_covariances(path: &Path, dim: usize, n: usize) -> Result<Vec<CovarianceBasis>> {
    let rows = parse_csv(&fs::read_to_string(path)?, dim * dim)?;
    let bases: Vec<CovarianceBasis> = rows
        .into_iter()
        .map(|r| CovarianceBasis::full(DMatrix::from_row_slice(dim, dim, &r)))
        .collect::<Result<_>>()?;
    match bases.len() {
        1 => Ok(vec![bases[0].clone(); n]),
        k if k == n => Ok(bases),
        k => Err(MisreError::InvalidInput(format!("{k} covariances given for {n} points"))),
    }
}

/// Writes points as CSV with shortest round-trip formatting.
pub fn write_points_to<W: Write>(mut out: W, points: &[InputPoint]) -> io::Result<()> {
    for p in points {
        let row: Vec<String> = p.y.iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_points(path: &Path, points: &[InputPoint]) -> Result<()> {
    let mut buf = Vec::new();
    write_points_to(&mut buf, points)?;
    fs::write(path, buf)?;
    Ok(())
}

/// One label per line, `-1` for outliers.
pub fn write_labels(path: &Path, labels: &[i64]) -> Result<()> {
    let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
    fs::write(path, text)?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    fs::read_to_string(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse::<i64>().map_err(|_| parse_error(i as u64 + 1, "malformed label")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows() {
        assert_eq!(parse_csv("1.5,2.0\n3.0,4.0", 2).unwrap(), vec![vec![1.5, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn header_and_comments_are_skipped() {
        let rows = parse_csv("x,y\n# note\n1,2\n\n3, 4\n", 2).unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn malformed_row_reports_line() {
        match parse_csv("1,2\n3,abc\n", 2) {
            Err(MisreError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_width_is_invalid() {
        assert!(matches!(parse_csv("1,2,3\n", 2), Err(MisreError::InvalidInput(_))));
    }

    #[test]
    fn ply_vertices_in_order() {
        let text = "ply\nformat ascii 1.0\ncomment test\nelement vertex 3\nproperty float x\nproperty float y\n\
                    property float z\nproperty uchar red\nelement face 0\nproperty list uchar int vertex_indices\n\
                    end_header\n0 0 0 255\n1 2 3 0\n-1 0.5 2 7\n";
        let pts = parse_ply(text).unwrap();
        assert_eq!(pts, vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0], vec![-1.0, 0.5, 2.0]]);
    }

    #[test]
    fn binary_ply_is_rejected() {
        let text = "ply\nformat binary_little_endian 1.0\nelement vertex 1\nend_header\n";
        assert!(parse_ply(text).is_err());
    }
}

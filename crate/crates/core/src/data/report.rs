use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{MisreError, Result};
use crate::pipeline::{EstimationResult, SCHEMA_VERSION};

/// The result document as pretty-printed JSON.
pub fn to_json(result: &EstimationResult) -> Result<String> {
    Ok(serde_json::to_string_pretty(result)?)
}

pub fn write_result(result: &EstimationResult, path: &Path) -> Result<()> {
    fs::write(path, to_json(result)? + "\n")?;
    Ok(())
}

pub fn read_result(path: &Path) -> Result<EstimationResult> {
    let result: EstimationResult = serde_json::from_str(&fs::read_to_string(path)?)?;
    if result.schema_version != SCHEMA_VERSION {
        return Err(MisreError::InvalidInput(format!(
            "result schema version {} is not supported (expected {SCHEMA_VERSION})",
            result.schema_version
        )));
    }
    Ok(result)
}

/// Rank-ordered `scale / inliers / strength` table, optionally limited to
/// the `top_k` strongest structures.
pub fn format_table(result: &EstimationResult, top_k: Option<usize>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:>4}  {:>12}  {:>8}  {:>12}", "rank", "scale", "inliers", "strength");
    let shown = top_k.unwrap_or(usize::MAX);
    for s in result.structures.iter().take(shown) {
        let mut flags = Vec::new();
        if s.exact {
            flags.push("exact");
        }
        if s.tls_fallback {
            flags.push("no-refit");
        }
        let _ = writeln!(
            out,
            "{:>4}  {:>12.4}  {:>8}  {:>12.4}  {}",
            s.rank,
            s.scale,
            s.n_in,
            s.strength,
            flags.join(",")
        );
    }
    if result.structures.len() > shown {
        let _ = writeln!(out, "({} weaker structures not shown)", result.structures.len() - shown);
    }
    let _ = writeln!(out, "{} of {} points unclaimed", result.residual.len(), result.n_points);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{InputPoint, ModelKind};
    use crate::pipeline::{run, EstimationConfig};

    #[test]
    fn document_round_trips() {
        let pts: Vec<InputPoint> = (0..30).map(|i| InputPoint::new(vec![i as f64, 2.0])).collect();
        let res = run(&pts, &EstimationConfig::new(ModelKind::Line2d).trials(20)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        write_result(&res, &path).unwrap();
        let back = read_result(&path).unwrap();
        assert_eq!(back.structures, res.structures);
        assert_eq!(back.residual, res.residual);
        let json: serde_json::Value = serde_json::from_str(&to_json(&res).unwrap()).unwrap();
        assert_eq!(json["schema_version"], 1);
        for key in ["rank", "strength", "scale", "n_in", "theta", "alpha", "geometry", "inliers"] {
            assert!(json["structures"][0].get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn table_limits_rows() {
        let pts: Vec<InputPoint> = (0..30).map(|i| InputPoint::new(vec![i as f64, 2.0])).collect();
        let res = run(&pts, &EstimationConfig::new(ModelKind::Line2d).trials(20)).unwrap();
        let table = format_table(&res, Some(0));
        assert!(table.contains("1 weaker structures not shown"));
        assert!(format_table(&res, None).contains("exact"));
    }
}

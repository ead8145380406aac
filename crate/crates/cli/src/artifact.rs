//! Artifact output: CSV files with a one-line header plus a sidecar JSON
//! metadata file carrying the resolved config and the code version. CSV
//! content is fully deterministic; timestamps live only in the sidecar.

use anyhow::{Context, Result};
use serde_json::json;
use std::path::Path;

use crate::config::ExperimentConfig;

/// Shortest-roundtrip float formatting; NaN prints as `NaN`.
pub fn fmt_f64(v: f64) -> String {
    v.to_string()
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for r in rows {
        text.push_str(r);
        text.push('\n');
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write `<artifact>.meta.json` next to an artifact.
pub fn write_meta(
    artifact: &Path,
    config: &ExperimentConfig,
    extra: serde_json::Value,
) -> Result<()> {
    let meta_path = meta_path(artifact);
    let now = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let doc = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": now,
        "config": config,
        "extra": extra,
    });
    std::fs::write(&meta_path, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", meta_path.display()))
}

pub fn meta_path(artifact: &Path) -> std::path::PathBuf {
    let mut os = artifact.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

/// Sample mean and standard error (sample std over sqrt(n); 0 for n = 1).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n >= 1);
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stderr_of_constant_sample_is_zero() {
        let (m, se) = mean_stderr(&[2.0, 2.0, 2.0]);
        assert_eq!(m, 2.0);
        assert_eq!(se, 0.0);
        assert_eq!(mean_stderr(&[5.0]), (5.0, 0.0));
    }

    #[test]
    fn stderr_matches_formula() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let (m, se) = mean_stderr(&xs);
        assert_eq!(m, 2.5);
        // sample std = sqrt(5/3), stderr = sqrt(5/3)/2
        assert!((se - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn float_formatting_roundtrips() {
        for v in [0.1, 1.0 / 3.0, 2.2, f64::MIN_POSITIVE, 1e300] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}

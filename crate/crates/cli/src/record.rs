//! Result records and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// What one command invocation computed, with enough context to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub parameters: Value,
    pub outputs: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_secs: f64,
}

impl ResultRecord {
    pub fn new(command: &str, parameters: Value, outputs: Value, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            parameters,
            outputs,
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            wall_time_secs: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records contain only JSON-safe values")
    }
}

/// A float as JSON; non-finite values become the strings `inf`, `-inf`,
/// `nan`, which JSON numbers cannot express.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::from("nan")
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// CSV float cell with 17 significant digits, enough to round-trip.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `contents` to a temporary file beside `path`, then renames it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Input(format!("{}: cannot write: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn record_round_trips() {
        let mut r = ResultRecord::new(
            "capacity",
            json!({"eps": 0.1}),
            json!({"value": 0.1 + 0.2, "tiny": 5e-324, "big": f64::MAX, "eta": num(f64::INFINITY)}),
            Some(7),
        );
        r.wall_time_secs = 1.0 / 3.0;
        let back: ResultRecord = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.outputs["value"].as_f64().unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn csv_float_round_trips() {
        for v in [0.0, 1.0 / 3.0, 1e-300, 123456.789, -2.5e-7] {
            assert_eq!(csv_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "a").unwrap();
        write_atomic(&p, "b").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "b");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_path_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("out.csv");
        assert!(matches!(write_atomic(&p, "x"), Err(CliError::Input(_))));
    }
}

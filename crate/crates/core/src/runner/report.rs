//! Experiment reports and their CSV / JSON encodings.

use super::config::ParamValue;
use crate::error::{LabError, Result};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::path::Path;

/// |z| above which a z-tested record fails.
pub const Z_THRESHOLD: f64 = 3.0;

/// Floats are written with 17 significant digits; non-finite values become
/// the strings "NaN", "inf" and "-inf".
mod num17 {
    use super::*;

    pub fn encode(x: f64) -> String {
        if x.is_nan() {
            "\"NaN\"".into()
        } else if x.is_infinite() {
            if x > 0.0 {
                "\"inf\"".into()
            } else {
                "\"-inf\"".into()
            }
        } else {
            format!("{x:.16e}")
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(encode(*x)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Wire {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Wire::deserialize(d)? {
            Wire::Num(x) => Ok(x),
            Wire::Text(s) => match s.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

/// One reported quantity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Record {
    pub label: String,
    #[serde(with = "num17")]
    pub estimate: f64,
    #[serde(with = "num17")]
    pub std_error: f64,
    #[serde(with = "num17")]
    pub target: f64,
    #[serde(with = "num17")]
    pub z_score: f64,
    pub pass: bool,
    /// Absolute tolerance on |estimate − target| when the record is not a z-test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

// NaN != NaN, so compare bit patterns.
impl PartialEq for Record {
    fn eq(&self, o: &Self) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
        self.label == o.label
            && same(self.estimate, o.estimate)
            && same(self.std_error, o.std_error)
            && same(self.target, o.target)
            && same(self.z_score, o.z_score)
            && self.pass == o.pass
            && self.tolerance.map(f64::to_bits) == o.tolerance.map(f64::to_bits)
    }
}

fn z_of(estimate: f64, std_error: f64, target: f64) -> f64 {
    let d = estimate - target;
    if d == 0.0 {
        0.0
    } else {
        d / std_error
    }
}

impl Record {
    /// Passes when |z| ≤ 3.
    pub fn z_test(label: impl Into<String>, estimate: f64, std_error: f64, target: f64) -> Self {
        let z = z_of(estimate, std_error, target);
        Record {
            label: label.into(),
            estimate,
            std_error,
            target,
            z_score: z,
            pass: z.abs() <= Z_THRESHOLD,
            tolerance: None,
        }
    }

    /// Passes when |estimate − target| ≤ tolerance.
    pub fn within(label: impl Into<String>, estimate: f64, std_error: f64, target: f64, tolerance: f64) -> Self {
        Record {
            label: label.into(),
            estimate,
            std_error,
            target,
            z_score: if std_error > 0.0 {
                z_of(estimate, std_error, target)
            } else {
                f64::NAN
            },
            pass: (estimate - target).abs() <= tolerance,
            tolerance: Some(tolerance),
        }
    }

    /// Passes when estimate lies in [lo, hi]; the target is the midpoint.
    pub fn in_range(label: impl Into<String>, estimate: f64, std_error: f64, lo: f64, hi: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let mut r = Record::within(label, estimate, std_error, mid, 0.5 * (hi - lo));
        r.pass = (lo..=hi).contains(&estimate);
        r
    }

    /// A boolean check with the estimate reported as-is.
    pub fn flag(label: impl Into<String>, estimate: f64, pass: bool) -> Self {
        Record {
            label: label.into(),
            estimate,
            std_error: f64::NAN,
            target: f64::NAN,
            z_score: f64::NAN,
            pass,
            tolerance: None,
        }
    }

    /// Informational value that never fails.
    pub fn info(label: impl Into<String>, estimate: f64) -> Self {
        Record::flag(label, estimate, true)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub code_version: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub phase_guard_bits: u32,
    pub config: BTreeMap<String, ParamValue>,
    pub records: Vec<Record>,
    pub sampler: BTreeMap<String, String>,
    pub warnings: Vec<String>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn record(&self, label: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.label == label)
    }
}

pub fn emit_report(report: &ExperimentReport, format: super::Format) -> Result<Vec<u8>> {
    match format {
        super::Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| LabError::Integrity(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        super::Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["label", "estimate", "std_error", "target", "z_score", "pass"])
                .map_err(csv_err)?;
            for r in &report.records {
                let num = |x: f64| num17::encode(x).trim_matches('"').to_string();
                w.write_record([
                    r.label.clone(),
                    num(r.estimate),
                    num(r.std_error),
                    num(r.target),
                    num(r.z_score),
                    r.pass.to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.into_inner().map_err(|e| LabError::Io(e.into_error()))
        }
    }
}

fn csv_err(e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::Io(io),
        other => LabError::Integrity(format!("{other:?}")),
    }
}

pub fn parse_json_report(bytes: &[u8]) -> Result<ExperimentReport> {
    serde_json::from_slice(bytes).map_err(|e| LabError::Integrity(format!("bad report: {e}")))
}

pub fn write_report(path: &Path, report: &ExperimentReport, format: super::Format) -> Result<()> {
    std::fs::write(path, emit_report(report, format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::Format;

    fn report(records: Vec<Record>) -> ExperimentReport {
        ExperimentReport {
            experiment: "mertens".into(),
            code_version: "0.0.0".into(),
            seed: 1,
            threads: None,
            phase_guard_bits: 64,
            config: BTreeMap::from([("x".to_string(), ParamValue::Real(10.0))]),
            records,
            sampler: BTreeMap::new(),
            warnings: vec!["w".into()],
            runtime_seconds: 0.5,
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let empty = emit_report(&report(vec![]), Format::Csv).unwrap();
        assert_eq!(
            String::from_utf8(empty).unwrap(),
            "label,estimate,std_error,target,z_score,pass\n"
        );
        let one = emit_report(&report(vec![Record::z_test("a", 1.0, 0.1, 1.2)]), Format::Csv).unwrap();
        let text = String::from_utf8(one).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("a,1.0000000000000000e0,"));
    }

    #[test]
    fn json_round_trip_keeps_non_finite_values() {
        let r = report(vec![
            Record::z_test("a", 0.1 + 0.2, 1e-3, 0.3),
            Record::info("b", f64::NAN),
            Record::within("c", -f64::INFINITY, 0.0, 1.0, 0.5),
            Record::in_range("d", 1.0, 0.1, 0.8, 1.2),
        ]);
        let back = parse_json_report(&emit_report(&r, Format::Json).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn pass_rules() {
        assert!(Record::z_test("x", 1.29, 0.1, 1.0).pass);
        assert!(!Record::z_test("x", 1.31, 0.1, 1.0).pass);
        assert!(Record::z_test("x", 0.0, 0.0, 0.0).pass);
        assert!(!Record::within("x", 1.1, 0.0, 1.0, 0.05).pass);
        assert!(!Record::in_range("x", 1.25, 0.0, 0.8, 1.2).pass);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_report(Path::new("/nonexistent-dir/x.csv"), &report(vec![]), Format::Csv).unwrap_err();
        assert!(matches!(err, LabError::Io(_)));
    }
}

//! Run configuration: a flat TOML file of `key = value` lines.

use crate::error::{LabError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(LabError::schema(
                "format",
                format!("expected csv or json, got {other:?}"),
            )),
        }
    }
}

/// Value of one experiment parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Reals(Vec<f64>),
    Text(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Int,
    Real,
    Reals,
    Text,
}

#[derive(Clone, Copy, Debug)]
pub enum ParamDefault {
    Required,
    Int(i64),
    Real(f64),
    Reals(&'static [f64]),
    Text(&'static str),
    /// Optional with no value.
    Absent,
}

#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub default: ParamDefault,
    pub doc: &'static str,
}

impl ParamSpec {
    pub const fn new(name: &'static str, kind: ParamKind, default: ParamDefault, doc: &'static str) -> Self {
        ParamSpec {
            name,
            kind,
            default,
            doc,
        }
    }
}

/// Keys read by the runner itself rather than by an experiment.
pub const RUNNER_KEYS: [&str; 6] = ["experiment", "seed", "out", "format", "threads", "phase_guard_bits"];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: String,
    pub params: BTreeMap<String, toml::Value>,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub phase_guard_bits: u32,
}

impl RunConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        RunConfig {
            experiment: experiment.into(),
            params: BTreeMap::new(),
            seed: 0,
            output_path: None,
            format: Format::Csv,
            threads: None,
            phase_guard_bits: crate::phases::DEFAULT_GUARD_BITS,
        }
    }

    /// Parse config text. Runner keys found in the text fill the matching
    /// fields; everything else is kept as an experiment parameter.
    pub fn parse(experiment: Option<&str>, text: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| LabError::schema("<config>", e.message().to_string()))?;
        let mut cfg = RunConfig::new(String::new());
        for (key, value) in table {
            if matches!(value, toml::Value::Table(_)) {
                return Err(LabError::schema(key, "nested tables are not allowed"));
            }
            match key.as_str() {
                "experiment" => cfg.experiment = text_value(&key, &value)?,
                "seed" => cfg.seed = uint_value(&key, &value)?,
                "out" => cfg.output_path = Some(PathBuf::from(text_value(&key, &value)?)),
                "format" => cfg.format = text_value(&key, &value)?.parse()?,
                "threads" => cfg.threads = Some(uint_value(&key, &value)? as usize),
                "phase_guard_bits" => cfg.phase_guard_bits = uint_value(&key, &value)? as u32,
                _ => {
                    cfg.params.insert(key, value);
                }
            }
        }
        if let Some(name) = experiment {
            if !cfg.experiment.is_empty() && cfg.experiment != name {
                return Err(LabError::Usage(format!(
                    "config is for experiment {:?}, command line asks for {name:?}",
                    cfg.experiment
                )));
            }
            cfg.experiment = name.to_string();
        }
        if cfg.experiment.is_empty() {
            return Err(LabError::Usage("no experiment named".into()));
        }
        Ok(cfg)
    }
}

fn text_value(key: &str, v: &toml::Value) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| LabError::schema(key, "expected a string"))
}

fn uint_value(key: &str, v: &toml::Value) -> Result<u64> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as u64)
        .ok_or_else(|| LabError::schema(key, "expected a non-negative integer"))
}

/// Parameters validated against an experiment schema, defaults applied.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Params {
    values: BTreeMap<String, ParamValue>,
}

fn convert(spec: &ParamSpec, v: &toml::Value) -> Result<ParamValue> {
    let bad = |what: &str| LabError::schema(spec.name, format!("expected {what}"));
    let real = |v: &toml::Value| match v {
        toml::Value::Integer(i) => Some(*i as f64),
        toml::Value::Float(f) => Some(*f),
        _ => None,
    };
    match spec.kind {
        ParamKind::Int => v.as_integer().map(ParamValue::Int).ok_or_else(|| bad("an integer")),
        ParamKind::Real => real(v).map(ParamValue::Real).ok_or_else(|| bad("a number")),
        ParamKind::Reals => match v {
            toml::Value::Array(items) => items
                .iter()
                .map(|x| real(x).ok_or_else(|| bad("a list of numbers")))
                .collect::<Result<Vec<f64>>>()
                .map(ParamValue::Reals),
            other => real(other)
                .map(|x| ParamValue::Reals(vec![x]))
                .ok_or_else(|| bad("a list of numbers")),
        },
        ParamKind::Text => v
            .as_str()
            .map(|s| ParamValue::Text(s.into()))
            .ok_or_else(|| bad("a string")),
    }
}

impl Params {
    pub fn validate(schema: &[ParamSpec], raw: &BTreeMap<String, toml::Value>) -> Result<Self> {
        if let Some(key) = raw.keys().find(|k| !schema.iter().any(|s| s.name == k.as_str())) {
            let known: Vec<&str> = schema.iter().map(|s| s.name).collect();
            return Err(LabError::schema(
                key.clone(),
                format!("unknown parameter; expected one of {known:?}"),
            ));
        }
        let mut values = BTreeMap::new();
        for spec in schema {
            let v = match (raw.get(spec.name), spec.default) {
                (Some(v), _) => Some(convert(spec, v)?),
                (None, ParamDefault::Required) => {
                    return Err(LabError::schema(spec.name, "required parameter is missing"));
                }
                (None, ParamDefault::Int(i)) => Some(ParamValue::Int(i)),
                (None, ParamDefault::Real(x)) => Some(ParamValue::Real(x)),
                (None, ParamDefault::Reals(xs)) => Some(ParamValue::Reals(xs.to_vec())),
                (None, ParamDefault::Text(s)) => Some(ParamValue::Text(s.into())),
                (None, ParamDefault::Absent) => None,
            };
            if let Some(v) = v {
                values.insert(spec.name.to_string(), v);
            }
        }
        Ok(Params { values })
    }

    pub fn values(&self) -> &BTreeMap<String, ParamValue> {
        &self.values
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        match self.values.get(name) {
            Some(ParamValue::Real(x)) => Ok(*x),
            Some(ParamValue::Int(i)) => Ok(*i as f64),
            _ => Err(LabError::schema(name, "missing numeric parameter")),
        }
    }

    pub fn int(&self, name: &str) -> Result<i64> {
        match self.values.get(name) {
            Some(ParamValue::Int(i)) => Ok(*i),
            _ => Err(LabError::schema(name, "missing integer parameter")),
        }
    }

    /// A positive integer parameter.
    pub fn count(&self, name: &str) -> Result<usize> {
        let i = self.int(name)?;
        if i <= 0 {
            return Err(LabError::schema(name, format!("must be positive, got {i}")));
        }
        Ok(i as usize)
    }

    pub fn reals(&self, name: &str) -> Result<Vec<f64>> {
        match self.values.get(name) {
            Some(ParamValue::Reals(v)) => Ok(v.clone()),
            _ => Err(LabError::schema(name, "missing list parameter")),
        }
    }

    pub fn text(&self, name: &str) -> Result<String> {
        match self.values.get(name) {
            Some(ParamValue::Text(s)) => Ok(s.clone()),
            _ => Err(LabError::schema(name, "missing string parameter")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: [ParamSpec; 3] = [
        ParamSpec::new("x", ParamKind::Real, ParamDefault::Required, "cutoff"),
        ParamSpec::new("n", ParamKind::Int, ParamDefault::Int(2), "exponent"),
        ParamSpec::new("lambdas", ParamKind::Reals, ParamDefault::Reals(&[1.0, 0.6]), "scales"),
    ];

    #[test]
    fn parses_runner_keys_and_params() {
        let cfg = RunConfig::parse(None, "experiment = \"mertens\"\nseed = 9\nx = 10\nformat = \"json\"\n").unwrap();
        assert_eq!(cfg.experiment, "mertens");
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.format, Format::Json);
        let p = Params::validate(&SCHEMA, &cfg.params).unwrap();
        assert_eq!(p.real("x").unwrap(), 10.0);
        assert_eq!(p.int("n").unwrap(), 2);
        assert_eq!(p.reals("lambdas").unwrap(), vec![1.0, 0.6]);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let cfg = RunConfig::parse(Some("mertens"), "n = 3").unwrap();
        let err = Params::validate(&SCHEMA, &cfg.params).unwrap_err();
        assert!(matches!(&err, LabError::Schema { field, .. } if field == "x"));
        let cfg = RunConfig::parse(Some("mertens"), "x = 1\nbogus = 2").unwrap();
        let err = Params::validate(&SCHEMA, &cfg.params).unwrap_err();
        assert!(matches!(&err, LabError::Schema { field, .. } if field == "bogus"));
        let cfg = RunConfig::parse(Some("mertens"), "x = \"ten\"").unwrap();
        assert!(Params::validate(&SCHEMA, &cfg.params).is_err());
        assert!(RunConfig::parse(Some("m"), "[section]\nx = 1").is_err());
        assert!(matches!(RunConfig::parse(None, "x = 1"), Err(LabError::Usage(_))));
    }
}

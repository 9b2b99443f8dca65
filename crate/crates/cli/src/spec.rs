//! Channel specification files.
//!
//! A spec is one JSON document:
//!
//! ```json
//! {
//!   "input_size": 2,
//!   "state_count": 2,
//!   "main":  [[[0.9, 0.1], [0.1, 0.9]], [[0.7, 0.3], [0.3, 0.7]]],
//!   "eaves": [[[0.6, 0.4], [0.4, 0.6]], [[0.5, 0.5], [0.5, 0.5]]],
//!   "state_pmf": [0.5, 0.5],
//!   "constraint": {"box": {"center": [0.5, 0.5], "delta": 0.1}}
//! }
//! ```
//!
//! `constraint` may instead be `{"vertices": [[...], ...]}`. Matrix rows are
//! checked while parsing, so a bad row is reported with its line and column.

use std::fmt;
use std::path::Path;

use avwtc::capacity::{bsbe_channel, ConstraintSet};
use avwtc::{Avwtc, Dmc, Pmf};
use serde::de::{self, DeserializeSeed, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// Allowed deviation of a row or PMF sum from one.
pub const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    input_size: usize,
    state_count: usize,
    #[serde(deserialize_with = "main_matrices")]
    main: Vec<Vec<Vec<f64>>>,
    #[serde(deserialize_with = "eaves_matrices")]
    eaves: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    state_pmf: Option<Vec<f64>>,
    #[serde(default)]
    constraint: Option<RawConstraint>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawConstraint {
    Box { center: Vec<f64>, delta: f64 },
    Vertices(Vec<Vec<f64>>),
}

fn main_matrices<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<f64>>>, D::Error> {
    MatrixList("main").deserialize(d)
}

fn eaves_matrices<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Vec<f64>>>, D::Error> {
    MatrixList("eaves").deserialize(d)
}

struct MatrixList(&'static str);

impl<'de> DeserializeSeed<'de> for MatrixList {
    type Value = Vec<Vec<Vec<f64>>>;
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for MatrixList {
    type Value = Vec<Vec<Vec<f64>>>;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a list of matrices for `{}`", self.0)
    }
    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut out = Vec::new();
        while let Some(m) = seq.next_element_seed(Matrix { name: self.0, index: out.len() })? {
            out.push(m);
        }
        Ok(out)
    }
}

struct Matrix {
    name: &'static str,
    index: usize,
}

impl<'de> DeserializeSeed<'de> for Matrix {
    type Value = Vec<Vec<f64>>;
    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for Matrix {
    type Value = Vec<Vec<f64>>;
    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a matrix (list of rows) for `{}[{}]`", self.name, self.index)
    }
    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
        let mut rows = Vec::new();
        while let Some(row) = seq.next_element::<Vec<f64>>()? {
            if let Err(msg) = check_probabilities(&row) {
                return Err(de::Error::custom(format!("{}[{}] row {}: {msg}", self.name, self.index, rows.len())));
            }
            rows.push(row);
        }
        Ok(rows)
    }
}

fn check_probabilities(p: &[f64]) -> Result<(), String> {
    if let Some(v) = p.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(format!("entry {v} is not a finite nonnegative number"));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(format!("sums to {sum}, expected 1 within {ROW_TOLERANCE:e}"));
    }
    Ok(())
}

/// A parsed and validated channel with its optional state law and set.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub channel: Avwtc,
    pub state_pmf: Option<Pmf>,
    pub constraint: Option<ConstraintSet>,
}

impl ChannelSpec {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: cannot read: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses spec text. Errors carry `line L, column C:` when the problem
    /// has a position in the text.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            // serde_json appends " at line L column C"; report it up front.
            let bare = msg.rsplit_once(" at line ").map_or(msg.as_str(), |(m, _)| m);
            CliError::Input(format!("line {}, column {}: {bare}", e.line(), e.column()))
        })?;
        raw.validate()
    }

    /// The four-state BS-BE example with its product state type.
    pub fn builtin_bsbe(eps: f64, alpha: f64) -> Result<Self, CliError> {
        let (channel, q) = bsbe_channel(eps, alpha)?;
        Ok(Self { channel, state_pmf: Some(q), constraint: None })
    }
}

fn input(msg: String) -> CliError {
    CliError::Input(msg)
}

fn pmf(p: Vec<f64>, what: &str) -> Result<Pmf, CliError> {
    check_probabilities(&p).map_err(|m| input(format!("{what}: {m}")))?;
    Pmf::normalized(p).map_err(|e| input(format!("{what}: {e}")))
}

impl RawSpec {
    fn validate(self) -> Result<ChannelSpec, CliError> {
        if self.input_size == 0 || self.state_count == 0 {
            return Err(input("input_size and state_count must be >= 1".into()));
        }
        let family = |name: &str, mats: Vec<Vec<Vec<f64>>>| -> Result<Vec<Dmc>, CliError> {
            if mats.len() != self.state_count {
                return Err(input(format!(
                    "`{name}` has {} matrices, state_count is {}",
                    mats.len(),
                    self.state_count
                )));
            }
            mats.into_iter()
                .enumerate()
                .map(|(s, m)| {
                    if m.len() != self.input_size {
                        return Err(input(format!(
                            "{name}[{s}] has {} rows, input_size is {}",
                            m.len(),
                            self.input_size
                        )));
                    }
                    Dmc::new_normalized(m, ROW_TOLERANCE).map_err(|e| input(format!("{name}[{s}]: {e}")))
                })
                .collect()
        };
        let main = family("main", self.main)?;
        let eaves = family("eaves", self.eaves)?;
        let channel = Avwtc::new(main, eaves).map_err(|e| input(e.to_string()))?;
        let check_len = |p: &[f64], what: &str| {
            if p.len() == self.state_count {
                Ok(())
            } else {
                Err(input(format!("{what} has {} entries, state_count is {}", p.len(), self.state_count)))
            }
        };
        let state_pmf = match self.state_pmf {
            Some(p) => {
                check_len(&p, "state_pmf")?;
                Some(pmf(p, "state_pmf")?)
            }
            None => None,
        };
        let constraint = match self.constraint {
            None => None,
            Some(RawConstraint::Box { center, delta }) => {
                check_len(&center, "box center")?;
                let c = pmf(center, "box center")?;
                Some(ConstraintSet::boxed(c, delta).map_err(|e| input(e.to_string()))?)
            }
            Some(RawConstraint::Vertices(vs)) => {
                let vs = vs
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        check_len(&v, &format!("vertex {i}"))?;
                        pmf(v, &format!("vertex {i}"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(ConstraintSet::polytope(vs).map_err(|e| input(e.to_string()))?)
            }
        };
        Ok(ChannelSpec { channel, state_pmf, constraint })
    }
}

//! JSON system documents: a subshift, one potential, named sets and named measures.
//!
//! ```json
//! {
//!   "name": "golden-mean",
//!   "alphabet": 2,
//!   "transitions": [[1, 1], [1, 0]],
//!   "potential": { "range": 1, "table": [0, "ln(2)"] },
//!   "sets": [
//!     { "name": "X", "kind": "whole" },
//!     { "name": "C", "kind": "cylinders", "words": ["0", "10"] },
//!     { "name": "P", "kind": "periodic", "word": "0" }
//!   ],
//!   "measures": [
//!     { "name": "mu", "type": "markov", "matrix": [["1/2", "1/2"], [1, 0]] }
//!   ]
//! }
//! ```
//!
//! Numbers may be JSON numbers, decimal or fraction strings, or `ln(q)` for
//! a positive rational q. Measure entries must be rational and are kept
//! exact.

use std::path::Path;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{rational_from_decimal, MarkovMeasure};
use crate::symbolic::{BlockPotential, Piece, SetDescription, Subshift, SymbolicSet, Word};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Json(serde_json::Number),
    Text(String),
}

impl Number {
    fn rational(&self) -> Option<BigRational> {
        match self {
            Number::Json(n) => rational_from_decimal(&n.to_string()).ok(),
            Number::Text(s) => rational_from_decimal(s).ok(),
        }
    }

    fn real(&self) -> Option<f64> {
        if let Some(q) = self.rational() {
            return q.to_f64();
        }
        let Number::Text(s) = self else { return None };
        let s = s.trim();
        let inner = s.strip_prefix("ln(").or_else(|| s.strip_prefix("log("))?.strip_suffix(')')?;
        let q = rational_from_decimal(inner).ok()?;
        q.is_positive().then(|| q.to_f64().map(f64::ln)).flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPotential {
    pub range: usize,
    pub table: Vec<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RawSetKind {
    Whole,
    Empty,
    Cylinders { words: Vec<String> },
    Forbidding { words: Vec<String> },
    Subshift { matrix: Vec<Vec<u8>> },
    Periodic { word: String },
    Union { pieces: Vec<RawPiece> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPiece {
    #[serde(default)]
    pub prefixes: Vec<String>,
    #[serde(default)]
    pub forbidden: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSet {
    pub name: String,
    #[serde(flatten)]
    pub kind: RawSetKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RawMeasureKind {
    Bernoulli { probs: Vec<Number> },
    Markov {
        matrix: Vec<Vec<Number>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stationary: Option<Vec<Number>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawMeasure {
    pub name: String,
    #[serde(flatten)]
    pub kind: RawMeasureKind,
}

/// The document exactly as written.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    #[serde(default)]
    pub name: String,
    pub alphabet: usize,
    /// Omitted means the full shift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<Vec<Vec<u8>>>,
    /// Omitted means f ≡ 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<RawPotential>,
    #[serde(default)]
    pub sets: Vec<RawSet>,
    #[serde(default)]
    pub measures: Vec<RawMeasure>,
}

/// A validated system.
#[derive(Clone, Debug)]
pub struct SystemDocument {
    pub name: String,
    pub subshift: Subshift,
    pub potential: BlockPotential,
    pub sets: Vec<(String, SymbolicSet)>,
    pub measures: Vec<(String, MarkovMeasure)>,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Input(m) | Error::Precondition(m) => Error::Input(format!("{path}: {m}")),
        other => other,
    }
}

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("{path}: {msg}"))
}

fn words(path: &str, raw: &[String]) -> Result<Vec<Word>> {
    raw.iter().enumerate().map(|(i, s)| Word::parse(s).map_err(|e| at(&format!("{path}[{i}]"), e))).collect()
}

fn rationals(path: &str, raw: &[Number]) -> Result<Vec<BigRational>> {
    raw.iter()
        .enumerate()
        .map(|(i, x)| x.rational().ok_or_else(|| bad(&format!("{path}[{i}]"), "expected a rational number")))
        .collect()
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| Error::Input(format!("line {} column {}: {e}", e.line(), e.column())))?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn from_raw(raw: RawDocument) -> Result<Self> {
        let k = raw.alphabet;
        let matrix = raw.transitions.clone().unwrap_or_else(|| vec![vec![1; k]; k]);
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(bad("transitions", format!("expected a {k}x{k} matrix")));
        }
        let subshift = Subshift::new(&matrix).map_err(|e| at("transitions", e))?;
        let potential = match &raw.potential {
            None => BlockPotential::zero(&subshift),
            Some(p) => {
                let table: Vec<f64> = p
                    .table
                    .iter()
                    .enumerate()
                    .map(|(i, x)| x.real().ok_or_else(|| bad(&format!("potential.table[{i}]"), "expected a number or ln(q)")))
                    .collect::<Result<_>>()?;
                BlockPotential::new(&subshift, p.range, table).map_err(|e| at("potential", e))?
            }
        };
        let mut sets: Vec<(String, SymbolicSet)> = Vec::new();
        for (i, s) in raw.sets.iter().enumerate() {
            let path = format!("sets[{i}]");
            if sets.iter().any(|(n, _)| *n == s.name) {
                return Err(bad(&path, format!("duplicate set name {:?}", s.name)));
            }
            let set = match &s.kind {
                RawSetKind::Whole => Ok(SymbolicSet::whole(&subshift)),
                RawSetKind::Empty => Ok(SymbolicSet::empty(&subshift)),
                RawSetKind::Cylinders { words: w } => SymbolicSet::cylinders(&subshift, &words(&format!("{path}.words"), w)?),
                RawSetKind::Forbidding { words: w } => SymbolicSet::forbidding(&subshift, &words(&format!("{path}.words"), w)?),
                RawSetKind::Subshift { matrix } => SymbolicSet::sub_shift(&subshift, matrix),
                RawSetKind::Periodic { word } => {
                    SymbolicSet::periodic_orbit(&subshift, &Word::parse(word).map_err(|e| at(&format!("{path}.word"), e))?)
                }
                RawSetKind::Union { pieces } => {
                    let pieces = pieces
                        .iter()
                        .enumerate()
                        .map(|(j, p)| {
                            Ok(Piece {
                                prefixes: words(&format!("{path}.pieces[{j}].prefixes"), &p.prefixes)?,
                                forbidden: words(&format!("{path}.pieces[{j}].forbidden"), &p.forbidden)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    SymbolicSet::new(&subshift, SetDescription::Union(pieces))
                }
            }
            .map_err(|e| at(&path, e))?;
            sets.push((s.name.clone(), set));
        }
        let mut measures: Vec<(String, MarkovMeasure)> = Vec::new();
        for (i, m) in raw.measures.iter().enumerate() {
            let path = format!("measures[{i}]");
            if measures.iter().any(|(n, _)| *n == m.name) {
                return Err(bad(&path, format!("duplicate measure name {:?}", m.name)));
            }
            let mu = match &m.kind {
                RawMeasureKind::Bernoulli { probs } => MarkovMeasure::bernoulli_exact(&rationals(&format!("{path}.probs"), probs)?),
                RawMeasureKind::Markov { matrix, stationary } => {
                    let rows = matrix
                        .iter()
                        .enumerate()
                        .map(|(j, r)| rationals(&format!("{path}.matrix[{j}]"), r))
                        .collect::<Result<Vec<_>>>()?;
                    let pi = stationary.as_ref().map(|s| rationals(&format!("{path}.stationary"), s)).transpose()?;
                    MarkovMeasure::markov_exact(&rows, pi)
                }
            }
            .and_then(|mu| mu.check_compatible(&subshift).map(|_| mu))
            .map_err(|e| at(&path, e))?;
            measures.push((m.name.clone(), mu));
        }
        Ok(SystemDocument { name: raw.name, subshift, potential, sets, measures })
    }

    pub fn set(&self, name: &str) -> Result<&SymbolicSet> {
        self.sets.iter().find(|(n, _)| n == name).map(|(_, s)| s).ok_or_else(|| Error::Input(format!("no set named {name:?}")))
    }

    pub fn measure(&self, name: &str) -> Result<&MarkovMeasure> {
        self.measures
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Input(format!("no measure named {name:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: &str = r#"{
        "name": "golden-mean",
        "alphabet": 2,
        "transitions": [[1, 1], [1, 0]],
        "potential": { "range": 1, "table": [0, "ln(2)"] },
        "sets": [
            { "name": "X", "kind": "whole" },
            { "name": "C", "kind": "cylinders", "words": ["0", "10"] },
            { "name": "P", "kind": "periodic", "word": "0" },
            { "name": "U", "kind": "union", "pieces": [{ "prefixes": ["0"], "forbidden": ["0101"] }] }
        ],
        "measures": [
            { "name": "mu", "type": "markov", "matrix": [["1/2", "1/2"], [1, 0]] }
        ]
    }"#;

    #[test]
    fn reads_a_full_document() {
        let d = SystemDocument::from_json(GOLDEN).unwrap();
        assert_eq!(d.name, "golden-mean");
        assert!((d.potential.value(&[1]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(d.sets.len(), 4);
        let mu = d.measure("mu").unwrap();
        assert!(mu.is_exact());
        assert!((mu.stationary()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(d.set("nope").is_err());
    }

    #[test]
    fn decimals_become_exact() {
        let d = SystemDocument::from_json(r#"{"alphabet": 2, "measures": [{"name": "b", "type": "bernoulli", "probs": [0.3, "0.7"]}]}"#).unwrap();
        assert!(d.measure("b").unwrap().is_exact());
        assert!(d.potential.is_zero());
    }

    #[test]
    fn errors_name_the_location() {
        let e = SystemDocument::from_json(r#"{"alphabet": 2, "sets": [{"name": "a", "kind": "whole"}, {"name": "b", "kind": "cylinders", "words": ["0-"]}]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("sets[1].words[0]"), "{e}");
        let e = SystemDocument::from_json(r#"{"alphabet": 2, "measures": [{"name": "b", "type": "bernoulli", "probs": [0.3, 0.6]}]}"#).unwrap_err();
        assert!(e.to_string().contains("measures[0]"), "{e}");
        let e = SystemDocument::from_json(r#"{"alphabet": 2, "potential": {"range": 1, "table": [0, "ln(-1)"]}}"#).unwrap_err();
        assert!(e.to_string().contains("potential.table[1]"), "{e}");
        assert!(SystemDocument::from_json(r#"{"alphabet": 2, "colour": 1}"#).is_err());
        assert!(SystemDocument::from_json("{").is_err());
        let e = SystemDocument::from_json(r#"{"alphabet": 2, "transitions": [[1, 0]]}"#).unwrap_err();
        assert!(e.to_string().contains("transitions"), "{e}");
    }
}

//! Reported numbers: a value, the range it is known to lie in, and how it was obtained.

use serde::{Deserialize, Serialize};

use crate::engine::BoundKind;
use crate::report::ext_float;

/// Names of the quantities the library estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Bowen,
    CapacityLower,
    CapacityUpper,
    Packing,
    LocalLower,
    LocalUpper,
    MeasureBowen,
    MeasureCapacityLower,
    MeasureCapacityUpper,
    MeasurePacking,
    KatokBowen,
    KatokCapacityLower,
    KatokCapacityUpper,
    KatokPacking,
    GenericRate,
    GenericPacking,
    Transfer,
}

impl Quantity {
    pub const SET: [Quantity; 4] = [Quantity::Bowen, Quantity::CapacityLower, Quantity::CapacityUpper, Quantity::Packing];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Bowen => "bowen",
            Quantity::CapacityLower => "capacity-lower",
            Quantity::CapacityUpper => "capacity-upper",
            Quantity::Packing => "packing",
            Quantity::LocalLower => "local-lower",
            Quantity::LocalUpper => "local-upper",
            Quantity::MeasureBowen => "measure-bowen",
            Quantity::MeasureCapacityLower => "measure-capacity-lower",
            Quantity::MeasureCapacityUpper => "measure-capacity-upper",
            Quantity::MeasurePacking => "measure-packing",
            Quantity::KatokBowen => "katok-bowen",
            Quantity::KatokCapacityLower => "katok-capacity-lower",
            Quantity::KatokCapacityUpper => "katok-capacity-upper",
            Quantity::KatokPacking => "katok-packing",
            Quantity::GenericRate => "generic-rate",
            Quantity::GenericPacking => "generic-packing",
            Quantity::Transfer => "transfer",
        }
    }

    pub fn parse(s: &str) -> Option<Quantity> {
        ALL.iter().copied().find(|q| q.name() == s)
    }
}

const ALL: [Quantity; 17] = [
    Quantity::Bowen,
    Quantity::CapacityLower,
    Quantity::CapacityUpper,
    Quantity::Packing,
    Quantity::LocalLower,
    Quantity::LocalUpper,
    Quantity::MeasureBowen,
    Quantity::MeasureCapacityLower,
    Quantity::MeasureCapacityUpper,
    Quantity::MeasurePacking,
    Quantity::KatokBowen,
    Quantity::KatokCapacityLower,
    Quantity::KatokCapacityUpper,
    Quantity::KatokPacking,
    Quantity::GenericRate,
    Quantity::GenericPacking,
    Quantity::Transfer,
];

/// One (ε, δ, n, depth) stage of a computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub n: usize,
    pub depth: usize,
    #[serde(with = "ext_float")]
    pub value: f64,
    pub bound_kind: BoundKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureEstimate {
    pub quantity: Quantity,
    #[serde(with = "ext_float")]
    pub value: f64,
    #[serde(with = "ext_float::pair")]
    pub bracket: (f64, f64),
    pub epsilon_schedule: Vec<usize>,
    pub n_schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_schedule: Vec<f64>,
    pub bound_kind: BoundKind,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageRecord>,
}

impl PressureEstimate {
    /// The −∞ record used for the empty set.
    pub fn empty_set(quantity: Quantity, provenance: &str) -> Self {
        PressureEstimate {
            quantity,
            value: f64::NEG_INFINITY,
            bracket: (f64::NEG_INFINITY, f64::NEG_INFINITY),
            epsilon_schedule: Vec::new(),
            n_schedule: Vec::new(),
            delta_schedule: Vec::new(),
            bound_kind: BoundKind::Exact,
            provenance: provenance.to_string(),
            flags: vec!["empty-set".into()],
            stages: Vec::new(),
        }
    }

    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }

    /// Distance from `x` to the bracket (0 inside).
    pub fn distance_to(&self, x: f64) -> f64 {
        if x < self.bracket.0 {
            self.bracket.0 - x
        } else if x > self.bracket.1 {
            x - self.bracket.1
        } else {
            0.0
        }
    }

    pub(crate) fn flag(&mut self, s: &str) {
        if !self.flags.iter().any(|f| f == s) {
            self.flags.push(s.to_string());
        }
    }
}

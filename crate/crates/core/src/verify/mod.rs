//! Named verification suites: each runs a family of checks and reports the
//! measured gap next to the limit it must stay under.

mod measures;
mod sets;

use num_rational::BigRational;
use serde::Serialize;

use crate::document::SystemDocument;
use crate::error::{Error, Result};
use crate::estimate::PressureEstimate;
use crate::measures::MarkovMeasure;
use crate::report::ext_float;
use crate::symbolic::{BlockPotential, Subshift};

pub const SUITES: [&str; 11] = [
    "transfer",
    "chain",
    "structure",
    "identity-chain",
    "katok-equalities",
    "local-vs-katok",
    "billingsley",
    "generic-points",
    "variational-bowen",
    "variational-packing",
    "engine-oracle",
];

/// One assertion: passes when `gap <= limit`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "ext_float")]
    pub gap: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, gap: f64, limit: f64) -> Self {
        Check { name: name.into(), gap, limit, pass: gap <= limit }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), gap: if ok { 0.0 } else { 1.0 }, limit: 0.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Facts worth reporting that are not assertions, such as skipped cases.
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        SuiteReport { suite: suite.to_string(), seed, checks: Vec::new(), notes: Vec::new() }
    }

    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// A computation that should have produced a number failed outright.
    fn failed(&mut self, name: impl Into<String>, e: &Error) {
        self.checks.push(Check { name: format!("{}: {e}", name.into()), gap: f64::NAN, limit: 0.0, pass: false });
    }
}

/// What a suite runs on. Without a document the suites use their built-in cases.
#[derive(Clone, Debug, Default)]
pub struct SuiteInput<'a> {
    pub seed: u64,
    /// Overrides the suite's own tolerance where it has one.
    pub tol: Option<f64>,
    pub document: Option<&'a SystemDocument>,
    /// Measures of the document to use; all of them when empty.
    pub measures: Vec<String>,
}

impl SuiteInput<'_> {
    fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub fn run_suite(name: &str, input: &SuiteInput) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(name, input.seed);
    match name {
        "transfer" => sets::transfer(input, &mut report)?,
        "chain" => sets::chain(input, &mut report),
        "structure" => sets::structure(input, &mut report),
        "engine-oracle" => sets::engine_oracle(input, &mut report),
        "identity-chain" => measures::identity_chain(input, &mut report)?,
        "katok-equalities" => measures::katok_equalities(input, &mut report)?,
        "local-vs-katok" => measures::local_vs_katok(input, &mut report),
        "billingsley" => measures::billingsley(input, &mut report)?,
        "generic-points" => measures::generic_points(input, &mut report)?,
        "variational-bowen" => measures::variational(input, &mut report, false)?,
        "variational-packing" => measures::variational(input, &mut report, true)?,
        other => return Err(Error::Input(format!("unknown suite {other:?}; known suites: {}", SUITES.join(", ")))),
    }
    Ok(report)
}

/// A measure, its system and a potential.
#[derive(Clone, Debug)]
struct MeasureCase {
    label: String,
    sys: Subshift,
    mu: MarkovMeasure,
    f: BlockPotential,
}

fn exact(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Bernoulli(1/2) and Bernoulli(0.3) on the full 2-shift, each with f = 0 and
/// with f(0) = 0, f(1) = 1. Bernoulli(p) gives the symbol 0 probability p.
fn shipped_measure_cases() -> Vec<MeasureCase> {
    let sys = Subshift::full(2).unwrap();
    let measures = [
        ("bernoulli(1/2)", MarkovMeasure::bernoulli_exact(&[exact(1, 2), exact(1, 2)]).unwrap()),
        ("bernoulli(0.3)", MarkovMeasure::bernoulli_exact(&[exact(3, 10), exact(7, 10)]).unwrap()),
    ];
    let potentials = [("f=0", BlockPotential::zero(&sys)), ("f(1)=1", BlockPotential::from_symbols(&sys, &[0.0, 1.0]).unwrap())];
    let mut out = Vec::new();
    for (ml, mu) in &measures {
        for (fl, f) in &potentials {
            out.push(MeasureCase { label: format!("{ml}, {fl}"), sys: sys.clone(), mu: mu.clone(), f: f.clone() });
        }
    }
    out
}

fn measure_cases(input: &SuiteInput) -> Result<Vec<MeasureCase>> {
    let Some(doc) = input.document else { return Ok(shipped_measure_cases()) };
    let chosen: Vec<(String, MarkovMeasure)> = if input.measures.is_empty() {
        doc.measures.clone()
    } else {
        input.measures.iter().map(|n| Ok((n.clone(), doc.measure(n)?.clone()))).collect::<Result<_>>()?
    };
    if chosen.is_empty() {
        return Err(Error::Input(format!("{} defines no measures", doc.name)));
    }
    Ok(chosen
        .into_iter()
        .map(|(name, mu)| MeasureCase { label: format!("{}/{name}", doc.name), sys: doc.subshift.clone(), mu, f: doc.potential.clone() })
        .collect())
}

/// x − y with −∞ handled as the empty-set sentinel: −∞ on the left always fits.
fn excess(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if y == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        x - y
    }
}

fn half_width(e: &PressureEstimate) -> f64 {
    if e.bracket.0 == e.bracket.1 {
        0.0
    } else {
        0.5 * e.width()
    }
}

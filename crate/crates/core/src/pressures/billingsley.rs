use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::SampleBudget;
use super::set::{packing_pressure, SetSchedule};
use crate::error::{precondition, Result};
use crate::estimate::PressureEstimate;
use crate::measures::{local_pressure_sequence, sample_orbit, MarkovMeasure};
use crate::report::ext_float;
use crate::symbolic::{BlockPotential, Membership, Resolution, SetDescription, SymbolicSet, Word};

/// Depth of the cylinder search bracketing μ(Z) for non-ergodic μ.
const MASS_DEPTH: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// P̄_μ(x) ≤ s on Z implies P^P(Z) ≤ s.
    UpperBoundHolds,
    /// P̄_μ(x) ≥ s on Z with μ(Z) > 0 implies P^P(Z) ≥ s.
    LowerBoundHolds,
}

/// A sampled point of Z with its local pressure estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub seed: u64,
    #[serde(with = "ext_float")]
    pub lower: f64,
    #[serde(with = "ext_float")]
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCheck {
    pub direction: Direction,
    /// None when no witness was found.
    pub hypothesis: Option<bool>,
    /// The implied inequality for P^P(Z), within the tolerance.
    pub conclusion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BillingsleyVerdict {
    #[serde(with = "ext_float")]
    pub s: f64,
    pub tolerance: f64,
    /// Directions whose hypothesis and conclusion were both confirmed.
    pub directions: Vec<Direction>,
    pub checks: Vec<DirectionCheck>,
    pub witnesses: Vec<Witness>,
    /// min over witnesses of the upper local pressure: the largest s the lower direction accepts.
    #[serde(with = "ext_float")]
    pub estimated_s: f64,
    #[serde(with = "ext_float::pair")]
    pub measure_of_set: (f64, f64),
    pub packing: PressureEstimate,
    /// Range for P^P(Z) implied by the confirmed directions.
    #[serde(with = "ext_float::pair")]
    pub conclusion: (f64, f64),
    pub inconclusive: bool,
}

impl BillingsleyVerdict {
    /// No direction had its hypothesis met while its conclusion failed.
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.hypothesis != Some(true) || c.conclusion)
    }
}

/// μ(Z) as a bracket; exact for ergodic μ.
///
/// For ergodic μ a piece that forbids a word of positive measure is μ-null
/// (almost every orbit sees the word), and any other piece equals its prefix
/// cylinders up to a null set.
pub fn measure_of_set(z: &SymbolicSet, mu: &MarkovMeasure) -> Result<(f64, f64)> {
    mu.check_compatible(z.subshift())?;
    let pieces = match z.description() {
        SetDescription::Empty => return Ok((0.0, 0.0)),
        SetDescription::Whole => return Ok((1.0, 1.0)),
        SetDescription::Union(p) => p,
    };
    if mu.is_ergodic() {
        let mut prefixes: Vec<Vec<u8>> = Vec::new();
        for p in pieces {
            if p.forbidden.iter().any(|w| mu.log_cylinder_measure(w.symbols()) > f64::NEG_INFINITY) {
                continue;
            }
            if p.prefixes.is_empty() {
                return Ok((1.0, 1.0));
            }
            prefixes.extend(p.prefixes.iter().map(|w| w.symbols().to_vec()));
        }
        prefixes.sort();
        prefixes.dedup();
        let minimal: Vec<&Vec<u8>> = prefixes.iter().filter(|u| !prefixes.iter().any(|v| v.len() < u.len() && u.starts_with(v))).collect();
        let v: f64 = minimal.iter().map(|u| mu.log_cylinder_measure(u).exp()).sum();
        return Ok((v, v));
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    let k = mu.alphabet_size() as u8;
    let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
    while let Some(w) = stack.pop() {
        let p = if w.is_empty() { 1.0 } else { mu.log_cylinder_measure(&w).exp() };
        if p == 0.0 {
            continue;
        }
        match z.classify(&Word::new(w.clone())) {
            Membership::Empty => {}
            Membership::Full => {
                lo += p;
                hi += p;
            }
            Membership::Partial if w.len() >= MASS_DEPTH => hi += p,
            Membership::Partial => {
                for b in 0..k {
                    let mut next = w.clone();
                    next.push(b);
                    stack.push(next);
                }
            }
        }
    }
    Ok((lo, hi.min(1.0)))
}

/// Tests both directions of the Billingsley-type bounds for P^P(Z) on sampled points of Z.
pub fn billingsley_check(
    z: &SymbolicSet,
    mu: &MarkovMeasure,
    f: &BlockPotential,
    s: f64,
    budget: &SampleBudget,
    schedule: &SetSchedule,
    tolerance: f64,
) -> Result<BillingsleyVerdict> {
    let mass = measure_of_set(z, mu)?;
    if mass.1 <= 0.0 {
        return precondition("mu(Z) = 0: the lower direction needs a set of positive measure");
    }
    let m = *budget.m_list.iter().filter(|&&m| m + 1 >= f.range()).max().ok_or_else(|| crate::Error::Precondition("no usable resolution".into()))?;
    let res = Resolution::new(m)?;
    let len = budget.orbit_length;
    // rejection sampling of orbits that stay in Z
    let attempts = (budget.orbits * 50) as u64;
    let candidates: Vec<Option<Witness>> = (0..attempts)
        .into_par_iter()
        .map(|i| {
            let seed = budget.seed.wrapping_add(i);
            let w = sample_orbit(mu, seed, len)?;
            if z.classify(&w) == Membership::Empty {
                return Ok(None);
            }
            let seq = local_pressure_sequence(mu, f, &w, res)?;
            let tail = &seq[seq.len() / 2..];
            Ok(Some(Witness {
                seed,
                lower: tail.iter().cloned().fold(f64::INFINITY, f64::min),
                upper: tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            }))
        })
        .collect::<Result<_>>()?;
    let witnesses: Vec<Witness> = candidates.into_iter().flatten().take(budget.orbits).collect();
    let packing = packing_pressure(z, f, schedule)?;
    let p_lo = packing.bracket.0;
    let p_hi = packing.bracket.1;
    let max_upper = witnesses.iter().map(|w| w.upper).fold(f64::NEG_INFINITY, f64::max);
    let min_upper = witnesses.iter().map(|w| w.upper).fold(f64::INFINITY, f64::min);
    let found = !witnesses.is_empty();
    let upper = DirectionCheck {
        direction: Direction::UpperBoundHolds,
        hypothesis: found.then_some(max_upper <= s + tolerance),
        conclusion: p_lo <= s + tolerance,
    };
    let lower = DirectionCheck {
        direction: Direction::LowerBoundHolds,
        hypothesis: found.then(|| min_upper >= s - tolerance && mass.1 > 0.0),
        conclusion: p_hi >= s - tolerance,
    };
    let checks = vec![upper, lower];
    let directions: Vec<Direction> = checks.iter().filter(|c| c.hypothesis == Some(true) && c.conclusion).map(|c| c.direction).collect();
    let mut conclusion = (f64::NEG_INFINITY, f64::INFINITY);
    for d in &directions {
        match d {
            Direction::UpperBoundHolds => conclusion.1 = s,
            Direction::LowerBoundHolds => conclusion.0 = s,
        }
    }
    Ok(BillingsleyVerdict {
        s,
        tolerance,
        inconclusive: !found,
        directions,
        checks,
        witnesses,
        estimated_s: if found { min_upper } else { f64::NAN },
        measure_of_set: mass,
        packing,
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::StageSchedule;
    use crate::symbolic::Subshift;

    fn budget() -> SampleBudget {
        SampleBudget { m_list: vec![1], orbits: 6, orbit_length: 2000, seed: 3 }
    }

    fn sched() -> SetSchedule {
        SetSchedule { m_list: vec![1, 2], stage: StageSchedule { n_list: vec![8, 16], depth_cap: 20, alpha_tol: 1e-4 } }
    }

    #[test]
    fn full_shift_both_directions() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let f = BlockPotential::zero(&sys);
        let v = billingsley_check(&SymbolicSet::whole(&sys), &mu, &f, 2f64.ln(), &budget(), &sched(), 0.05).unwrap();
        assert_eq!(v.directions, vec![Direction::UpperBoundHolds, Direction::LowerBoundHolds]);
        assert!(v.consistent());
    }

    #[test]
    fn large_s_is_an_upper_bound() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        let f = BlockPotential::from_symbols(&sys, &[0.0, 1.0]).unwrap();
        let v = billingsley_check(&SymbolicSet::whole(&sys), &mu, &f, 10.0, &budget(), &sched(), 0.05).unwrap();
        assert!(v.directions.contains(&Direction::UpperBoundHolds));
        assert!(!v.directions.contains(&Direction::LowerBoundHolds));
    }

    #[test]
    fn null_set_is_rejected() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::forbidding(&sys, &[Word::parse("11").unwrap()]).unwrap();
        assert_eq!(measure_of_set(&z, &mu).unwrap(), (0.0, 0.0));
        assert!(billingsley_check(&z, &mu, &f, 0.4, &budget(), &sched(), 0.05).is_err());
    }

    #[test]
    fn cylinder_masses() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        let z = SymbolicSet::cylinders(&sys, &[Word::parse("0").unwrap(), Word::parse("01").unwrap(), Word::parse("11").unwrap()]).unwrap();
        let (lo, hi) = measure_of_set(&z, &mu).unwrap();
        assert!((lo - 0.79).abs() < 1e-12 && lo == hi);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{critical_value, BoundKind, StageSchedule, SumKind};
use crate::error::{precondition, Error, Result};
use crate::estimate::PressureEstimate;
use crate::symbolic::{BlockPotential, Resolution, SymbolicSet};

/// Resolutions and per-resolution stages for the set pressures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetSchedule {
    pub m_list: Vec<usize>,
    pub stage: StageSchedule,
}

impl Default for SetSchedule {
    fn default() -> Self {
        SetSchedule { m_list: vec![1, 2, 3, 4], stage: StageSchedule::default() }
    }
}

impl SetSchedule {
    /// Resolutions of the schedule inside the exactness regime of `f`.
    fn resolutions(&self, f: &BlockPotential) -> Result<Vec<Resolution>> {
        if self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return precondition("the m schedule must be strictly increasing");
        }
        let usable: Vec<Resolution> = self
            .m_list
            .iter()
            .filter(|&&m| m + 1 >= f.range())
            .map(|&m| Resolution::new(m))
            .collect::<Result<_>>()?;
        if usable.is_empty() {
            return precondition(format!("no resolution in {:?} reaches m >= r - 1 = {}", self.m_list, f.range() - 1));
        }
        Ok(usable)
    }
}

/// Range every pressure of a nonempty set must fall in.
pub(crate) fn admissible_range(z: &SymbolicSet, f: &BlockPotential) -> (f64, f64) {
    let k = z.subshift().alphabet_size() as f64;
    (f.min_value(), k.ln() + f.max_value())
}

pub(crate) fn check_range(est: &PressureEstimate, range: (f64, f64), slack: f64) -> Result<()> {
    if est.value < range.0 - slack || est.value > range.1 + slack {
        return Err(Error::Invariant(format!(
            "{} = {} outside [min f, log k + max f] = [{}, {}]",
            est.quantity.name(),
            est.value,
            range.0,
            range.1
        )));
    }
    Ok(())
}

/// Runs one construction over the m schedule and combines the stages.
///
/// The reported value is the finest stage; the bracket is widened to cover the
/// linear extrapolation in 2^-m through the last two stages.
fn over_resolutions(kind: SumKind, z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<PressureEstimate> {
    if z.is_empty_set() {
        return Ok(PressureEstimate::empty_set(kind.quantity(), "empty set"));
    }
    let range = admissible_range(z, f);
    let wide = (range.0 - 1.0, range.1 + 1.0);
    let stages: Vec<PressureEstimate> = schedule
        .resolutions(f)?
        .into_par_iter()
        .map(|res| critical_value(kind, z, res, f, wide, &schedule.stage))
        .collect::<Result<_>>()?;
    let mut est = combine(stages);
    check_range(&est, range, 10.0 * schedule.stage.alpha_tol)?;
    est.epsilon_schedule = schedule.m_list.iter().copied().filter(|&m| m + 1 >= f.range()).collect();
    Ok(est)
}

pub(crate) fn combine(stages: Vec<PressureEstimate>) -> PressureEstimate {
    let n = stages.len();
    let finest = &stages[n - 1];
    let mut out = finest.clone();
    if n >= 2 {
        let prev = &stages[n - 2];
        let extrapolated = 2.0 * finest.value - prev.value;
        out.bracket = (out.bracket.0.min(extrapolated), out.bracket.1.max(extrapolated));
        if out.bracket.1 - out.bracket.0 > 1e-9 && out.bound_kind == BoundKind::Exact {
            out.bound_kind = BoundKind::Bracketed;
        }
    }
    out.stages = stages.iter().flat_map(|s| s.stages.iter().cloned()).collect();
    for s in &stages {
        for fl in &s.flags {
            out.flag(fl);
        }
        if s.bound_kind == BoundKind::Inconclusive {
            out.bound_kind = BoundKind::Inconclusive;
        }
    }
    out
}

pub fn pesin_pitskel_pressure(z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<PressureEstimate> {
    over_resolutions(SumKind::Bowen, z, f, schedule)
}

/// (lower, upper) capacity pressures.
pub fn capacity_pressures(z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<(PressureEstimate, PressureEstimate)> {
    let lower = over_resolutions(SumKind::CapacityLower, z, f, schedule)?;
    let upper = over_resolutions(SumKind::CapacityUpper, z, f, schedule)?;
    Ok((lower, upper))
}

pub fn packing_pressure(z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<PressureEstimate> {
    over_resolutions(SumKind::Packing, z, f, schedule)
}

/// All four set pressures: Bowen, lower capacity, upper capacity, packing.
pub fn set_pressures(z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<[PressureEstimate; 4]> {
    let bowen = pesin_pitskel_pressure(z, f, schedule)?;
    let (lower, upper) = capacity_pressures(z, f, schedule)?;
    let packing = packing_pressure(z, f, schedule)?;
    Ok([bowen, lower, upper, packing])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::transfer_pressure;
    use crate::symbolic::{Subshift, Word};

    fn quick() -> SetSchedule {
        SetSchedule { m_list: vec![1, 2], stage: StageSchedule { n_list: vec![8, 16], depth_cap: 22, alpha_tol: 1e-4 } }
    }

    #[test]
    fn four_pressures_match_transfer_on_golden_mean() {
        let sys = Subshift::golden_mean();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::whole(&sys);
        let target = transfer_pressure(&sys, &f).unwrap().value;
        for est in set_pressures(&z, &f, &quick()).unwrap() {
            assert!((est.value - target).abs() < 0.03, "{:?} {}", est.quantity, est.value);
            assert!(est.bracket.0 <= est.value && est.value <= est.bracket.1);
        }
    }

    #[test]
    fn empty_and_periodic() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let e = packing_pressure(&SymbolicSet::empty(&sys), &f, &quick()).unwrap();
        assert_eq!(e.value, f64::NEG_INFINITY);
        let orbit = SymbolicSet::periodic_orbit(&sys, &Word::parse("011").unwrap()).unwrap();
        assert!(pesin_pitskel_pressure(&orbit, &f, &quick()).unwrap().value.abs() < 0.02);
    }

    #[test]
    fn rejects_unusable_schedule() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::new(&sys, 3, vec![0.0; 8]).unwrap();
        let s = SetSchedule { m_list: vec![1], ..quick() };
        assert!(pesin_pitskel_pressure(&SymbolicSet::whole(&sys), &f, &s).is_err());
    }
}

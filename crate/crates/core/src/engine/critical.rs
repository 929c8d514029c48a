use serde::{Deserialize, Serialize};

use super::certificates::{component_brackets, cover_above};
use super::sums::{cover_sum, log_fixed_order_sums, modified_packing_sum, packing_sum, BoundKind};
use super::tree::{BallMode, KeyGraph, TreeModel};
use crate::error::{precondition, Error, Result};
use crate::estimate::{PressureEstimate, Quantity, StageRecord};
use crate::symbolic::{BlockPotential, Resolution, SymbolicSet};

/// The set constructions whose critical values [`critical_value`] extracts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumKind {
    Bowen,
    CapacityLower,
    CapacityUpper,
    Packing,
}

impl SumKind {
    pub fn quantity(self) -> Quantity {
        match self {
            SumKind::Bowen => Quantity::Bowen,
            SumKind::CapacityLower => Quantity::CapacityLower,
            SumKind::CapacityUpper => Quantity::CapacityUpper,
            SumKind::Packing => Quantity::Packing,
        }
    }
}

/// Orders and truncation depth for one resolution stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSchedule {
    pub n_list: Vec<usize>,
    pub depth_cap: usize,
    pub alpha_tol: f64,
}

impl Default for StageSchedule {
    fn default() -> Self {
        StageSchedule { n_list: vec![9, 18], depth_cap: 26, alpha_tol: 1e-3 }
    }
}

/// Offset from the bracket used for the truncated-sum diagnostics.
const PROBE: f64 = 0.05;

/// Critical value of one construction at one resolution, with per-stage diagnostics.
pub fn critical_value(
    kind: SumKind,
    z: &SymbolicSet,
    res: Resolution,
    f: &BlockPotential,
    alpha_bracket: (f64, f64),
    schedule: &StageSchedule,
) -> Result<PressureEstimate> {
    if schedule.n_list.is_empty() || schedule.n_list.contains(&0) {
        return precondition("the n schedule must be nonempty and positive");
    }
    if z.is_empty_set() {
        return Ok(PressureEstimate::empty_set(kind.quantity(), "empty set"));
    }
    let mut est = match kind {
        SumKind::Bowen => bowen_stage(z, res, f, schedule)?,
        SumKind::Packing => packing_stage(z, res, f, schedule)?,
        SumKind::CapacityLower | SumKind::CapacityUpper => capacity_stage(kind, z, res, f, schedule)?,
    };
    if est.value < alpha_bracket.0 - schedule.alpha_tol || est.value > alpha_bracket.1 + schedule.alpha_tol {
        return precondition(format!(
            "alpha bracket [{}, {}] does not contain the critical value {}",
            alpha_bracket.0, alpha_bracket.1, est.value
        ));
    }
    est.epsilon_schedule = vec![res.m()];
    Ok(est)
}

fn stage_estimate(kind: SumKind, value: f64, bracket: (f64, f64), schedule: &StageSchedule, provenance: &str) -> PressureEstimate {
    let bound_kind = if bracket.1 - bracket.0 <= 1e-9 { BoundKind::Exact } else { BoundKind::Bracketed };
    PressureEstimate {
        quantity: kind.quantity(),
        value,
        bracket,
        epsilon_schedule: Vec::new(),
        n_schedule: schedule.n_list.clone(),
        delta_schedule: Vec::new(),
        bound_kind,
        provenance: provenance.to_string(),
        flags: Vec::new(),
        stages: Vec::new(),
    }
}

fn probe_monotone(records: &[(StageRecord, StageRecord)]) -> Result<()> {
    for (below, above) in records {
        if below.value < above.value * (1.0 - 1e-9) {
            return Err(Error::Invariant(format!(
                "truncated sum at n = {} increased with alpha ({} < {})",
                below.n, below.value, above.value
            )));
        }
    }
    Ok(())
}

fn bowen_stage(z: &SymbolicSet, res: Resolution, f: &BlockPotential, schedule: &StageSchedule) -> Result<PressureEstimate> {
    let model = TreeModel::new(z, f, res, BallMode::Open);
    let graph = KeyGraph::build(&model);
    let comps = component_brackets(&graph);
    let lo = comps.iter().map(|c| c.lo).fold(f64::NEG_INFINITY, f64::max);
    let top = comps.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
    let depth = schedule.depth_cap.saturating_sub(graph.key_len).max(1);
    let hi = cover_above(&graph, depth, lo, top + schedule.alpha_tol, schedule.alpha_tol).max(lo);
    let mut est = stage_estimate(SumKind::Bowen, lo, (lo, hi), schedule, "cover sums on the key graph");
    let mut pairs = Vec::new();
    for &n in &schedule.n_list {
        let cap = schedule.depth_cap.max(n + res.m());
        let b = cover_sum(z, n, lo - PROBE, res, f, cap)?;
        let a = cover_sum(z, n, hi + PROBE, res, f, cap)?;
        pairs.push((record(res, n, cap, b.value, b.bound_kind), record(res, n, cap, a.value, a.bound_kind)));
    }
    probe_monotone(&pairs)?;
    est.stages = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    Ok(est)
}

fn packing_stage(z: &SymbolicSet, res: Resolution, f: &BlockPotential, schedule: &StageSchedule) -> Result<PressureEstimate> {
    let model = TreeModel::new(z, f, res, BallMode::Closed);
    let graph = KeyGraph::build(&model);
    let comps = component_brackets(&graph);
    let lo = comps.iter().map(|c| c.lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = comps.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
    let mut est = stage_estimate(SumKind::Packing, lo, (lo, hi), schedule, "packing sums on the key graph");
    let below = modified_packing_sum(z, lo - PROBE, res, f, 1, schedule.depth_cap)?;
    let above = modified_packing_sum(z, hi + PROBE, res, f, 1, schedule.depth_cap)?;
    if below.lower != f64::INFINITY || above.upper != 0.0 {
        est.flag("inconclusive-modified-packing");
        est.bound_kind = BoundKind::Inconclusive;
    }
    let mut pairs = Vec::new();
    for &n in &schedule.n_list {
        let cap = schedule.depth_cap.max(n + res.m());
        let b = packing_sum(z, n, lo - PROBE, res, f, cap)?;
        let a = packing_sum(z, n, hi + PROBE, res, f, cap)?;
        pairs.push((record(res, n, cap, b.value, b.bound_kind), record(res, n, cap, a.value, a.bound_kind)));
    }
    probe_monotone(&pairs)?;
    est.stages = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
    Ok(est)
}

/// Half-window differences (log Q(n) − log Q(n/2)) / (n/2) over the upper half of 1..=n_max.
pub(crate) fn capacity_tail(log_q: &[f64]) -> Vec<(usize, f64)> {
    let n_max = log_q.len();
    let start = (n_max / 2).max(2);
    (start..=n_max)
        .filter(|n| n % 2 == 0)
        .map(|n| (n, (log_q[n - 1] - log_q[n / 2 - 1]) / (n / 2) as f64))
        .collect()
}

/// The fixed-order sums count weighted paths in the key graph, so their growth
/// rate is the largest component growth rate; the half-window differences are
/// kept as stage records only.
fn capacity_stage(kind: SumKind, z: &SymbolicSet, res: Resolution, f: &BlockPotential, schedule: &StageSchedule) -> Result<PressureEstimate> {
    let n_max = *schedule.n_list.iter().max().unwrap();
    if n_max < 2 {
        return precondition("capacity needs n_max >= 2");
    }
    let model = TreeModel::new(z, f, res, BallMode::Open);
    let graph = KeyGraph::build(&model);
    let comps = component_brackets(&graph);
    let lo = comps.iter().map(|c| c.lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = comps.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
    let mut est = stage_estimate(kind, lo, (lo, hi), schedule, "growth rate of fixed-order sums on the key graph");
    let log_q = log_fixed_order_sums(z, n_max, res, f);
    let tail = capacity_tail(&log_q);
    let far = tail.iter().map(|t| (t.1 - lo).abs()).fold(0.0, f64::max);
    if far > 0.1 {
        est.flag("slow-capacity-convergence");
    }
    est.n_schedule = (1..=n_max).collect();
    est.stages = (1..=n_max)
        .map(|n| record(res, n, n + res.m(), log_q[n - 1] / n as f64, BoundKind::Exact))
        .collect();
    Ok(est)
}

fn record(res: Resolution, n: usize, depth: usize, value: f64, bound_kind: BoundKind) -> StageRecord {
    StageRecord { m: res.m(), delta: None, n, depth, value, bound_kind }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{Subshift, Word};

    fn sched() -> StageSchedule {
        StageSchedule { n_list: vec![8, 16], depth_cap: 22, alpha_tol: 1e-4 }
    }

    #[test]
    fn capacity_upper_full_shift_closed_form() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::whole(&sys);
        let e = critical_value(SumKind::CapacityUpper, &z, Resolution::new(2).unwrap(), &f, (0.0, 2.0), &sched()).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 1e-6, "{e:?}");
        // raw stage values are (1/n) log 2^{n+m}
        let s = &e.stages[9];
        assert!((s.value - (12.0 / 10.0) * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bowen_full_shift_brackets_log2() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::whole(&sys);
        let e = critical_value(SumKind::Bowen, &z, Resolution::new(2).unwrap(), &f, (0.0, 2.0), &sched()).unwrap();
        assert!(e.bracket.0 <= 2f64.ln() + 1e-9 && 2f64.ln() <= e.bracket.1);
        assert!(e.width() <= 0.02);
    }

    #[test]
    fn constant_shift_moves_every_kind() {
        let sys = Subshift::golden_mean();
        let f = BlockPotential::zero(&sys);
        let g = f.shifted(0.37);
        let z = SymbolicSet::whole(&sys);
        let res = Resolution::new(1).unwrap();
        for kind in [SumKind::Bowen, SumKind::Packing, SumKind::CapacityLower, SumKind::CapacityUpper] {
            let a = critical_value(kind, &z, res, &f, (-1.0, 3.0), &sched()).unwrap();
            let b = critical_value(kind, &z, res, &g, (-1.0, 3.0), &sched()).unwrap();
            assert!((b.value - a.value - 0.37).abs() < 2e-4, "{kind:?} {} {}", a.value, b.value);
        }
    }

    #[test]
    fn bracket_must_contain_value() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::whole(&sys);
        let r = critical_value(SumKind::Packing, &z, Resolution::new(1).unwrap(), &f, (1.0, 2.0), &sched());
        assert!(r.is_err());
    }

    #[test]
    fn periodic_orbit_has_zero_pressure() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let z = SymbolicSet::periodic_orbit(&sys, &Word::parse("011").unwrap()).unwrap();
        for kind in [SumKind::Bowen, SumKind::Packing] {
            let e = critical_value(kind, &z, Resolution::new(2).unwrap(), &f, (-1.0, 1.0), &sched()).unwrap();
            assert!(e.value.abs() < 1e-6, "{kind:?} {e:?}");
        }
    }
}

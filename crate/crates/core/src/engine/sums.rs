use serde::{Deserialize, Serialize};

use super::certificates::{component_brackets, ComponentBracket};
use super::tree::{node_value, BallMode, KeyGraph, TreeModel};
use crate::error::{precondition, Result};
use crate::numeric::log_sum_exp;
use crate::report::ext_float;
use crate::symbolic::{BlockPotential, Resolution, SymbolicSet, Word};

/// How a reported number relates to the quantity it approximates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    Exact,
    LowerBound,
    UpperBound,
    /// Two-sided bracket that has not closed to within tolerance.
    Bracketed,
    Inconclusive,
}

/// Value of a truncated Carathéodory sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumResult {
    #[serde(with = "ext_float")]
    pub value: f64,
    pub depth_cap: usize,
    pub bound_kind: BoundKind,
    #[serde(with = "ext_float::option")]
    pub growth_rate: Option<f64>,
    /// Certified range for the limit the truncated value stands for.
    #[serde(with = "ext_float::pair")]
    pub bracket: (f64, f64),
}

impl SumResult {
    pub(crate) fn exact(value: f64, depth_cap: usize) -> Self {
        SumResult { value, depth_cap, bound_kind: BoundKind::Exact, growth_rate: None, bracket: (value, value) }
    }
}

/// Relative stabilization threshold across consecutive depth caps.
pub const STABLE_REL: f64 = 1e-9;

fn check_regime(f: &BlockPotential, res: Resolution) -> Result<()> {
    if res.m() + 1 < f.range() {
        return precondition(format!(
            "resolution m = {} is below the exactness regime m >= r - 1 = {}",
            res.m(),
            f.range() - 1
        ));
    }
    Ok(())
}

/// log of the truncated sum at each depth cap in `caps` (all ≥ the root length).
fn truncated_log_sums(model: &TreeModel, graph: &KeyGraph, n: usize, alpha: f64, caps: &[usize], covering: bool) -> Vec<f64> {
    let l0 = model.len_of_order(n);
    let max_rem = caps.iter().map(|c| c - l0).max().unwrap_or(0);
    let table = if covering { graph.cover_table(alpha, max_rem) } else { graph.packing_table(alpha, max_rem) };
    let shift = -alpha * n as f64;
    if l0 >= graph.key_len {
        let masses = graph.forward_masses(l0);
        let top = masses.last().expect("at least one level");
        caps.iter()
            .map(|c| {
                let rem = c - l0;
                log_sum_exp(top.iter().zip(&table[rem]).map(|(m, t)| shift + m + t))
            })
            .collect()
    } else {
        let roots = model.level_words(l0);
        caps.iter()
            .map(|c| {
                let rem = c - l0;
                log_sum_exp(roots.iter().map(|w| {
                    let mut buf = w.clone();
                    shift + model.log_weight(w) + node_value(model, graph, &table, &mut buf, rem, alpha, covering)
                }))
            })
            .collect()
    }
}

fn stabilized(logs: &[f64]) -> bool {
    logs.len() >= 3 && logs.windows(2).all(|p| (p[0] == p[1]) || (p[0] - p[1]).abs() <= STABLE_REL)
}

fn three_caps(l0: usize, depth_cap: usize) -> Vec<usize> {
    (depth_cap.saturating_sub(2).max(l0)..=depth_cap).collect()
}

/// M(n, α, 2^-m, Z, f) truncated at words of length `depth_cap`.
pub fn cover_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential, depth_cap: usize) -> Result<SumResult> {
    sum_common(z, n, alpha, res, f, depth_cap, BallMode::Open)
}

/// M^P(n, α, 2^-m, Z, f) truncated at words of length `depth_cap`.
pub fn packing_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential, depth_cap: usize) -> Result<SumResult> {
    sum_common(z, n, alpha, res, f, depth_cap, BallMode::Closed)
}

fn sum_common(
    z: &SymbolicSet,
    n: usize,
    alpha: f64,
    res: Resolution,
    f: &BlockPotential,
    depth_cap: usize,
    mode: BallMode,
) -> Result<SumResult> {
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    if !alpha.is_finite() {
        return precondition("alpha must be finite");
    }
    check_regime(f, res)?;
    let covering = mode == BallMode::Open;
    if z.is_empty_set() {
        return Ok(SumResult::exact(0.0, depth_cap));
    }
    let model = TreeModel::new(z, f, res, mode);
    let l0 = model.len_of_order(n);
    if depth_cap < l0 {
        return precondition(format!("depth cap {depth_cap} is shorter than the root length {l0}"));
    }
    let graph = KeyGraph::build(&model);
    let caps = three_caps(l0, depth_cap);
    let logs = truncated_log_sums(&model, &graph, n, alpha, &caps, covering);
    let last = *logs.last().unwrap();
    let (bound_kind, growth_rate) = if stabilized(&logs) {
        (BoundKind::Exact, None)
    } else if covering {
        (BoundKind::UpperBound, None)
    } else {
        let g = if logs.len() >= 2 { Some(last - logs[logs.len() - 2]) } else { None };
        (BoundKind::LowerBound, g)
    };
    let value = last.exp();
    let bracket = match bound_kind {
        BoundKind::Exact => (value, value),
        BoundKind::UpperBound => (0.0, value),
        _ => (value, f64::INFINITY),
    };
    Ok(SumResult { value, depth_cap, bound_kind, growth_rate, bracket })
}

/// R(n, α, 2^-m, Z, f): the only minimal cover by balls of order n.
pub fn fixed_order_cover_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential) -> Result<f64> {
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    check_regime(f, res)?;
    Ok((log_fixed_order_sum(z, n, res, f) - alpha * n as f64).exp())
}

/// log of the α = 0 fixed-order sum Q(n) = Σ e^{f_n} over length-(n+m) cylinders meeting Z.
pub fn log_fixed_order_sum(z: &SymbolicSet, n: usize, res: Resolution, f: &BlockPotential) -> f64 {
    log_fixed_order_sums(z, n, res, f)[n - 1]
}

/// log Q(1), .., log Q(n_max).
pub fn log_fixed_order_sums(z: &SymbolicSet, n_max: usize, res: Resolution, f: &BlockPotential) -> Vec<f64> {
    if z.is_empty_set() {
        return vec![f64::NEG_INFINITY; n_max];
    }
    let model = TreeModel::new(z, f, res, BallMode::Open);
    let graph = KeyGraph::build(&model);
    let top = model.len_of_order(n_max);
    let masses = if top >= graph.key_len { graph.forward_masses(top) } else { Vec::new() };
    (1..=n_max)
        .map(|n| {
            let len = model.len_of_order(n);
            if len >= graph.key_len {
                log_sum_exp(masses[len - graph.key_len].iter().copied())
            } else {
                log_sum_exp(model.level_words(len).iter().map(|w| model.log_weight(w)))
            }
        })
        .collect()
}

/// Bracket for the modified packing sum M^𝒫(α, 2^-m, Z, f).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModifiedPackingSum {
    #[serde(with = "ext_float")]
    pub lower: f64,
    #[serde(with = "ext_float")]
    pub upper: f64,
    /// Cylinders of the partition that realized the upper bound.
    pub cells: Vec<Word>,
    pub bound_kind: BoundKind,
}

impl ModifiedPackingSum {
    pub fn as_sum_result(&self, depth_cap: usize) -> SumResult {
        let value = if self.lower == self.upper { self.lower } else { self.upper };
        SumResult { value, depth_cap, bound_kind: self.bound_kind, growth_rate: None, bracket: (self.lower, self.upper) }
    }
}

fn packing_brackets(z: &SymbolicSet, f: &BlockPotential, res: Resolution) -> Vec<ComponentBracket> {
    let model = TreeModel::new(z, f, res, BallMode::Closed);
    let graph = KeyGraph::build(&model);
    component_brackets(&graph)
}

/// Limiting packing sum of one cell: 0 once every component is certified
/// subcritical, otherwise unbounded as far as the certificates can tell.
fn cell_limit_upper(z: &SymbolicSet, f: &BlockPotential, res: Resolution, alpha: f64) -> f64 {
    if z.is_empty_set() {
        return 0.0;
    }
    let hi = packing_brackets(z, f, res).iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
    if alpha > hi {
        0.0
    } else {
        f64::INFINITY
    }
}

fn best_partition(
    z: &SymbolicSet,
    f: &BlockPotential,
    res: Resolution,
    alpha: f64,
    u: &Word,
    partition_depth: usize,
) -> Result<(f64, Vec<Word>)> {
    let cell = z.restrict_to(u)?;
    if cell.is_empty_set() {
        return Ok((0.0, Vec::new()));
    }
    let own = cell_limit_upper(&cell, f, res, alpha);
    if own == 0.0 || u.len() >= partition_depth {
        return Ok((own, vec![u.clone()]));
    }
    let mut total = 0.0;
    let mut cells = Vec::new();
    for b in z.subshift().next_symbols(u.symbols()) {
        let (v, c) = best_partition(z, f, res, alpha, &u.extended(b), partition_depth)?;
        total += v;
        cells.extend(c);
        if total == f64::INFINITY {
            break;
        }
    }
    if total < own {
        Ok((total, cells))
    } else {
        Ok((own, vec![u.clone()]))
    }
}

/// M^𝒫 bracketed by cylinder partitions (upper) and component growth certificates (lower).
pub fn modified_packing_sum(
    z: &SymbolicSet,
    alpha: f64,
    res: Resolution,
    f: &BlockPotential,
    partition_depth: usize,
    depth_cap: usize,
) -> Result<ModifiedPackingSum> {
    check_regime(f, res)?;
    if !alpha.is_finite() {
        return precondition("alpha must be finite");
    }
    if z.is_empty_set() {
        return Ok(ModifiedPackingSum { lower: 0.0, upper: 0.0, cells: vec![], bound_kind: BoundKind::Exact });
    }
    let (upper, cells) = best_partition(z, f, res, alpha, &Word::empty(), partition_depth)?;
    let comps = packing_brackets(z, f, res);
    let lo = comps.iter().map(|c| c.lo).fold(f64::NEG_INFINITY, f64::max);
    let lower = if alpha < lo {
        f64::INFINITY
    } else {
        // any finite stage value is a lower bound only for the stage itself; keep 0
        let _ = depth_cap;
        0.0
    };
    let bound_kind = if lower == upper { BoundKind::Exact } else { BoundKind::Inconclusive };
    Ok(ModifiedPackingSum { lower, upper, cells, bound_kind })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Subshift;

    fn full2() -> (Subshift, BlockPotential) {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        (sys, f)
    }

    #[test]
    fn cover_full_shift_at_critical() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        let r = cover_sum(&z, 2, 2f64.ln(), Resolution::new(1).unwrap(), &f, 8).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{r:?}");
        assert_eq!(r.bound_kind, BoundKind::Exact);
    }

    #[test]
    fn cover_above_critical_is_small() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        let res = Resolution::new(1).unwrap();
        let a = 2f64.ln() + 0.2;
        let r10 = cover_sum(&z, 10, a, res, &f, 14).unwrap();
        let r11 = cover_sum(&z, 11, a, res, &f, 15).unwrap();
        assert!(r10.value < 0.4);
        assert!(r11.value < r10.value);
    }

    #[test]
    fn packing_full_shift_at_critical() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        for n in 1..4 {
            let r = packing_sum(&z, n, 2f64.ln(), Resolution::new(1).unwrap(), &f, 10).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
            assert_eq!(r.bound_kind, BoundKind::Exact);
        }
    }

    #[test]
    fn packing_below_critical_grows() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        let a = 2f64.ln() - 0.3;
        let r = packing_sum(&z, 2, a, Resolution::new(1).unwrap(), &f, 12).unwrap();
        assert_eq!(r.bound_kind, BoundKind::LowerBound);
        assert!((r.growth_rate.unwrap() - 0.3).abs() < 1e-9);
    }

    #[test]
    fn empty_set_sums_vanish() {
        let (sys, f) = full2();
        let z = SymbolicSet::empty(&sys);
        let res = Resolution::new(1).unwrap();
        assert_eq!(cover_sum(&z, 2, 0.0, res, &f, 6).unwrap().value, 0.0);
        assert_eq!(packing_sum(&z, 2, 0.0, res, &f, 6).unwrap().value, 0.0);
        assert_eq!(modified_packing_sum(&z, 0.0, res, &f, 2, 6).unwrap().upper, 0.0);
    }

    #[test]
    fn fixed_order_counts() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        let res = Resolution::new(2).unwrap();
        assert!((fixed_order_cover_sum(&z, 3, 0.0, res, &f).unwrap() - 32.0).abs() < 1e-9);
        assert!((fixed_order_cover_sum(&z, 3, 2f64.ln(), res, &f).unwrap() - 4.0).abs() < 1e-9);
        let u = Word::parse("01101").unwrap();
        let one = SymbolicSet::cylinders(&sys, &[u]).unwrap();
        assert!((fixed_order_cover_sum(&one, 3, 0.7, res, &f).unwrap() - (-2.1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn modified_packing_jumps_at_log2() {
        let (sys, f) = full2();
        let z = SymbolicSet::whole(&sys);
        let res = Resolution::new(1).unwrap();
        let below = modified_packing_sum(&z, 2f64.ln() - 0.1, res, &f, 2, 10).unwrap();
        let above = modified_packing_sum(&z, 2f64.ln() + 0.1, res, &f, 2, 10).unwrap();
        assert_eq!(below.lower, f64::INFINITY);
        assert_eq!(above.upper, 0.0);
    }

    #[test]
    fn small_resolution_rejected() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::new(&sys, 3, vec![0.0; 8]).unwrap();
        let z = SymbolicSet::whole(&sys);
        assert!(cover_sum(&z, 2, 0.0, Resolution::new(1).unwrap(), &f, 6).is_err());
    }
}

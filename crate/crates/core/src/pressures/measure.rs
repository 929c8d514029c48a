use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::limit;
use crate::engine::carrier::Carrier;
use crate::engine::classes::{Band, ClassTree};
use crate::engine::katok::{fixed_order_bracket, varying_order_dual};
use crate::engine::BoundKind;
use crate::error::{precondition, Result};
use crate::estimate::{PressureEstimate, Quantity, StageRecord};
use crate::measures::{local_pressure_sequence, sample_orbit, MarkovMeasure};
use crate::symbolic::{BlockPotential, Resolution};

/// Flag on measure pressures: the identities they are compared with assume an
/// invertible map, which a one-sided shift is not.
pub const HYPOTHESIS_RELAXED: &str = "hypothesis-relaxed";

/// Schedules for the Carathéodory and Katok measure pressures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSchedule {
    pub m_list: Vec<usize>,
    /// Orders fed to the limit fit.
    pub n_list: Vec<usize>,
    /// Decreasing mass defects.
    pub delta_list: Vec<f64>,
    /// Varying-order sums look `ceil(depth_ratio · n)` symbols below the root.
    pub depth_ratio: f64,
    pub alpha_tol: f64,
}

impl Default for MeasureSchedule {
    fn default() -> Self {
        MeasureSchedule {
            m_list: vec![1, 2],
            n_list: (32..=128).step_by(8).collect(),
            delta_list: vec![0.5, 0.25],
            depth_ratio: 0.5,
            alpha_tol: 1e-5,
        }
    }
}

impl MeasureSchedule {
    fn check(&self, f: &BlockPotential) -> Result<()> {
        if self.m_list.is_empty() || self.n_list.is_empty() || self.delta_list.is_empty() {
            return precondition("measure schedules must be nonempty");
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) || self.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return precondition("m and n schedules must be strictly increasing");
        }
        if self.delta_list.windows(2).any(|w| w[0] <= w[1]) {
            return precondition("the delta schedule must be strictly decreasing");
        }
        if self.delta_list.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return precondition("every delta must lie in (0, 1)");
        }
        if self.n_list[0] == 0 {
            return precondition("order n must be at least 1");
        }
        if self.m_list.iter().any(|&m| m < f.range()) {
            return precondition(format!("measure pressures need m >= r = {}", f.range()));
        }
        Ok(())
    }

    fn depth(&self, n: usize, m: usize) -> usize {
        n + m + (self.depth_ratio * n as f64).ceil() as usize
    }

    fn max_depth(&self, m: usize) -> usize {
        self.depth(*self.n_list.last().unwrap(), m)
    }
}

/// Sampling budget for the local pressures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub m_list: Vec<usize>,
    pub orbits: usize,
    pub orbit_length: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget { m_list: vec![1, 2], orbits: 16, orbit_length: 4000, seed: 0 }
    }
}

/// Root of a decreasing log-sum g (g(α) = 0) to `tol`, by bracketing around
/// `guess` and then Illinois false position.
fn solve_decreasing(g: impl Fn(f64) -> f64, guess: f64, tol: f64) -> f64 {
    let mut step = 0.05;
    let (mut lo, mut hi) = (guess - step, guess + step);
    let mut g_lo = g(lo);
    while g_lo <= 0.0 {
        hi = lo;
        step *= 2.0;
        lo -= step;
        if step > 1e6 {
            return f64::NEG_INFINITY;
        }
        g_lo = g(lo);
    }
    let mut g_hi = g(hi);
    while g_hi > 0.0 {
        lo = hi;
        g_lo = g_hi;
        step *= 2.0;
        hi += step;
        if step > 1e6 {
            return f64::INFINITY;
        }
        g_hi = g(hi);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mut x = if g_lo.is_finite() && g_hi.is_finite() { (lo * g_hi - hi * g_lo) / (g_hi - g_lo) } else { 0.5 * (lo + hi) };
        // keep a margin from the ends so the bracket always shrinks
        let margin = 0.1 * tol;
        if !(x > lo + margin && x < hi - margin) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        if gx.abs() < 1e-12 {
            return x;
        }
    }
    0.5 * (lo + hi)
}

/// One (m, δ) stage: α*(n) along the n schedule and its fitted limit.
#[derive(Clone, Debug)]
struct Curve {
    m: usize,
    delta: f64,
    ns: Vec<usize>,
    depths: Vec<usize>,
    values: Vec<f64>,
    limit: f64,
    half_width: f64,
}

impl Curve {
    fn new(m: usize, delta: f64, ns: Vec<usize>, depths: Vec<usize>, values: Vec<f64>) -> Self {
        let (limit, half_width) = limit(&ns, &values);
        Curve { m, delta, ns, depths, values, limit, half_width }
    }
}

fn katok_bowen_curve(tree: &ClassTree, m: usize, delta: f64, s: &MeasureSchedule, guess: f64) -> Curve {
    let mut values = Vec::new();
    let mut g = guess;
    // the multiplier moves slowly with α and n; each search starts from the last one
    let lam = std::cell::Cell::new(1.0);
    for &n in &s.n_list {
        let depth = s.depth(n, m);
        let a = solve_decreasing(
            |alpha| {
                let (dual, l) = varying_order_dual(tree, n, alpha, delta, depth, lam.get());
                lam.set(l);
                dual.ln()
            },
            g,
            s.alpha_tol,
        );
        g = a;
        values.push(a);
    }
    let depths = s.n_list.iter().map(|&n| s.depth(n, m)).collect();
    Curve::new(m, delta, s.n_list.clone(), depths, values)
}

fn katok_capacity_curve(tree: &ClassTree, m: usize, delta: f64, s: &MeasureSchedule) -> Curve {
    let values = s.n_list.iter().map(|&n| fixed_order_bracket(tree, n + m, n, 0.0, delta).0.ln() / n as f64).collect();
    Curve::new(m, delta, s.n_list.clone(), s.n_list.iter().map(|&n| n + m).collect(), values)
}

fn carrier_curves(c: &Carrier, m: usize, delta: f64, s: &MeasureSchedule, guess: f64) -> [Curve; 3] {
    let depths: Vec<usize> = s.n_list.iter().map(|&n| s.depth(n, m)).collect();
    let mut cover = Vec::new();
    let mut packing = Vec::new();
    let mut g = guess;
    for (&n, &d) in s.n_list.iter().zip(&depths) {
        let a = solve_decreasing(|alpha| c.cover(n, alpha, d).ln(), g, s.alpha_tol);
        let b = solve_decreasing(|alpha| c.packing(n, alpha, d).ln(), a, s.alpha_tol);
        g = a;
        cover.push(a);
        packing.push(b);
    }
    let capacity = s.n_list.iter().map(|&n| c.log_capacity(n) / n as f64).collect();
    [
        Curve::new(m, delta, s.n_list.clone(), depths.clone(), cover),
        Curve::new(m, delta, s.n_list.clone(), s.n_list.iter().map(|&n| n + m).collect(), capacity),
        Curve::new(m, delta, s.n_list.clone(), depths, packing),
    ]
}

/// Katok packing stage: cells carrier ∩ [a] taken in increasing packing value
/// until they carry mass 1 − δ; the stage value is the largest value used.
fn katok_packing_curve(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, band: Band, delta: f64, s: &MeasureSchedule, guess: f64) -> Result<Curve> {
    let m = res.m();
    let depth = s.max_depth(m);
    let mut cells = Vec::new();
    for a in 0..mu.alphabet_size() as u8 {
        if mu.stationary()[a as usize] <= 0.0 {
            continue;
        }
        let c = Carrier::with_band(mu, f, res, depth, band, &[a])?;
        if c.is_empty() {
            continue;
        }
        let [_, _, packing] = carrier_curves(&c, m, delta, s, guess);
        cells.push((packing, c.mass()));
    }
    cells.sort_by(|a, b| a.0.limit.total_cmp(&b.0.limit));
    let mut mass = 0.0;
    let mut chosen: Option<Curve> = None;
    for (curve, cell_mass) in cells {
        mass += cell_mass;
        chosen = Some(match chosen {
            None => curve,
            Some(prev) => {
                let values = prev.values.iter().zip(&curve.values).map(|(a, b)| a.max(*b)).collect();
                let hw = prev.half_width.max(curve.half_width);
                let mut c = Curve::new(m, delta, prev.ns.clone(), prev.depths.clone(), values);
                c.limit = prev.limit.max(curve.limit);
                c.half_width = hw;
                c
            }
        });
        if mass >= 1.0 - delta {
            break;
        }
    }
    match chosen {
        Some(c) if mass >= 1.0 - delta - 1e-12 => Ok(c),
        _ => precondition("cells of the carrier do not reach the requested mass"),
    }
}

/// Folds stage curves into an estimate: the value is the stage at the finest
/// m and smallest δ; the bracket covers every stage and the linear
/// extrapolations in δ and in 2^-m.
fn assemble(quantity: Quantity, curves: &[Curve], s: &MeasureSchedule, provenance: &str) -> PressureEstimate {
    let finest_m = *s.m_list.last().unwrap();
    let smallest_delta = *s.delta_list.last().unwrap();
    let pick = |m: usize, d: f64| curves.iter().find(|c| c.m == m && c.delta == d);
    let head = pick(finest_m, smallest_delta).expect("finest stage present");
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in curves {
        lo = lo.min(c.limit - c.half_width);
        hi = hi.max(c.limit + c.half_width);
    }
    if s.delta_list.len() >= 2 {
        let d1 = s.delta_list[s.delta_list.len() - 2];
        if let Some(prev) = pick(finest_m, d1) {
            let x = head.limit - (head.limit - prev.limit) * smallest_delta / (d1 - smallest_delta);
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if s.m_list.len() >= 2 {
        let m1 = s.m_list[s.m_list.len() - 2];
        if let Some(prev) = pick(m1, smallest_delta) {
            let ratio = 2f64.powi(-(finest_m as i32)) / (2f64.powi(-(m1 as i32)) - 2f64.powi(-(finest_m as i32)));
            let x = head.limit - (prev.limit - head.limit) * ratio;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let stages = curves
        .iter()
        .flat_map(|c| {
            c.ns.iter().zip(&c.depths).zip(&c.values).map(move |((&n, &depth), &value)| StageRecord {
                m: c.m,
                delta: Some(c.delta),
                n,
                depth,
                value,
                bound_kind: BoundKind::Bracketed,
            })
        })
        .collect();
    PressureEstimate {
        quantity,
        value: head.limit,
        bracket: (lo.min(head.limit), hi.max(head.limit)),
        epsilon_schedule: s.m_list.clone(),
        n_schedule: s.n_list.clone(),
        delta_schedule: s.delta_list.clone(),
        bound_kind: BoundKind::Bracketed,
        provenance: provenance.to_string(),
        // one-sided shifts are not homeomorphisms
        flags: vec![HYPOTHESIS_RELAXED.to_string()],
        stages,
    }
}

fn check_measure(mu: &MarkovMeasure, f: &BlockPotential) -> Result<()> {
    if mu.alphabet_size() != f.alphabet_size() {
        return precondition("measure and potential use different alphabets");
    }
    Ok(())
}

fn grid(s: &MeasureSchedule) -> Vec<(usize, f64)> {
    s.m_list.iter().flat_map(|&m| s.delta_list.iter().map(move |&d| (m, d))).collect()
}

/// Carathéodory measure pressures: Bowen, lower capacity, upper capacity, packing.
pub fn caratheodory_measure_pressures(mu: &MarkovMeasure, f: &BlockPotential, schedule: &MeasureSchedule) -> Result<[PressureEstimate; 4]> {
    check_measure(mu, f)?;
    schedule.check(f)?;
    let guess = mu.free_energy(f);
    let stages: Vec<[Curve; 3]> = grid(schedule)
        .into_par_iter()
        .map(|(m, d)| {
            let res = Resolution::new(m)?;
            let c = Carrier::typical(mu, f, res, schedule.max_depth(m), d)?;
            Ok(carrier_curves(&c, m, d, schedule, guess))
        })
        .collect::<Result<_>>()?;
    let column = |i: usize| stages.iter().map(|s| s[i].clone()).collect::<Vec<_>>();
    let prov = "typical-band carriers of mass >= 1 - delta";
    let bowen = assemble(Quantity::MeasureBowen, &column(0), schedule, prov);
    let capacity = column(1);
    let lower = assemble(Quantity::MeasureCapacityLower, &capacity, schedule, prov);
    let upper = assemble(Quantity::MeasureCapacityUpper, &capacity, schedule, prov);
    let packing = assemble(Quantity::MeasurePacking, &column(2), schedule, prov);
    Ok([bowen, lower, upper, packing])
}

/// Katok measure pressures: Bowen, lower capacity, upper capacity, packing.
pub fn katok_measure_pressures(mu: &MarkovMeasure, f: &BlockPotential, schedule: &MeasureSchedule) -> Result<[PressureEstimate; 4]> {
    check_measure(mu, f)?;
    schedule.check(f)?;
    let guess = mu.free_energy(f);
    let trees: Vec<(usize, ClassTree)> = schedule
        .m_list
        .par_iter()
        .map(|&m| {
            let tree = ClassTree::build(mu, f, Resolution::new(m)?, schedule.max_depth(m), None)?;
            Ok((m, tree))
        })
        .collect::<Result<_>>()?;
    let stages: Vec<(Curve, Curve, Curve)> = grid(schedule)
        .into_par_iter()
        .map(|(m, d)| {
            let tree = &trees.iter().find(|t| t.0 == m).unwrap().1;
            let res = Resolution::new(m)?;
            let bowen = katok_bowen_curve(tree, m, d, schedule, guess);
            let capacity = katok_capacity_curve(tree, m, d, schedule);
            let band = Carrier::typical(mu, f, res, schedule.max_depth(m), 0.5 * d)?.band;
            let packing = katok_packing_curve(mu, f, res, band, d, schedule, guess)?;
            Ok((bowen, capacity, packing))
        })
        .collect::<Result<_>>()?;
    let bowen: Vec<Curve> = stages.iter().map(|s| s.0.clone()).collect();
    let capacity: Vec<Curve> = stages.iter().map(|s| s.1.clone()).collect();
    let packing: Vec<Curve> = stages.iter().map(|s| s.2.clone()).collect();
    Ok([
        assemble(Quantity::KatokBowen, &bowen, schedule, "Lagrangian dual of the varying-order Katok sum"),
        assemble(Quantity::KatokCapacityLower, &capacity, schedule, "LP value of the fixed-order Katok sum"),
        assemble(Quantity::KatokCapacityUpper, &capacity, schedule, "LP value of the fixed-order Katok sum"),
        assemble(Quantity::KatokPacking, &packing, schedule, "carrier cells ranked by packing value"),
    ])
}

/// (lower, upper) local pressures averaged over sampled orbits.
pub fn measure_local_pressures(mu: &MarkovMeasure, f: &BlockPotential, budget: &SampleBudget) -> Result<(PressureEstimate, PressureEstimate)> {
    check_measure(mu, f)?;
    if budget.orbits == 0 || budget.orbit_length < 8 || budget.m_list.is_empty() {
        return precondition("sample budget too small");
    }
    let m_list: Vec<usize> = budget.m_list.iter().copied().filter(|&m| m + 1 >= f.range()).collect();
    if m_list.is_empty() {
        return precondition("no resolution reaches m >= r - 1");
    }
    let ergodic = mu.is_ergodic();
    // per m: (liminf, limsup) estimates of every orbit
    let per_m: Vec<Vec<(f64, f64)>> = m_list
        .iter()
        .map(|&m| {
            let res = Resolution::new(m)?;
            (0..budget.orbits)
                .into_par_iter()
                .map(|i| {
                    let w = sample_orbit(mu, budget.seed.wrapping_add(i as u64), budget.orbit_length)?;
                    let seq = local_pressure_sequence(mu, f, &w, res)?;
                    let tail = &seq[seq.len() / 2..];
                    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    Ok((lo, hi))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let stats = |xs: &[f64]| {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        (mean, (var / n).sqrt())
    };
    let target = mu.free_energy(f);
    let build = |quantity: Quantity, pick: fn(&(f64, f64)) -> f64| {
        let means: Vec<(f64, f64)> = per_m.iter().map(|v| stats(&v.iter().map(pick).collect::<Vec<_>>())).collect();
        let (value, se) = *means.last().unwrap();
        let drift = means.iter().map(|(m, _)| (m - value).abs()).fold(0.0, f64::max);
        let mut half = 2.0 * se + drift + 1e-4;
        if !ergodic {
            let all = per_m.last().unwrap().iter().map(pick);
            let spread = all.map(|x| (x - value).abs()).fold(0.0, f64::max);
            half = half.max(spread);
        }
        let stages = m_list
            .iter()
            .zip(&means)
            .map(|(&m, &(v, _))| StageRecord { m, delta: None, n: budget.orbit_length, depth: budget.orbit_length, value: v, bound_kind: BoundKind::Bracketed })
            .collect();
        let mut est = PressureEstimate {
            quantity,
            value,
            bracket: (value - half, value + half),
            epsilon_schedule: m_list.clone(),
            n_schedule: vec![budget.orbit_length / 2, budget.orbit_length],
            delta_schedule: Vec::new(),
            bound_kind: BoundKind::Bracketed,
            provenance: format!("{} sampled orbits; target h + integral = {target:.6}", budget.orbits),
            flags: vec![HYPOTHESIS_RELAXED.to_string()],
            stages,
        };
        if !ergodic {
            est.flag("reducible-chain");
        }
        est
    };
    Ok((build(Quantity::LocalLower, |p| p.0), build(Quantity::LocalUpper, |p| p.1)))
}

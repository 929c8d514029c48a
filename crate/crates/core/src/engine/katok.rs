use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::classes::ClassTree;
use super::sums::{BoundKind, SumResult};
use crate::error::{precondition, Result};
use crate::measures::MarkovMeasure;
use crate::symbolic::{BlockPotential, Resolution, Subshift, Word};

/// Which Katok sum to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KatokMode {
    /// R_μ: all balls of order n.
    FixedOrder,
    /// M_μ: orders between n and the ball order at `depth_cap`; `q` sets the
    /// resolution 2^-q of the multiplier search.
    VaryingOrder { depth_cap: usize, q: u32 },
}

pub const DEFAULT_Q: u32 = 12;

/// Largest knapsack table (items × measure units) solved exactly.
const EXACT_DP_BUDGET: u128 = 50_000_000;
const EXACT_DP_MAX_LEN: usize = 14;

fn check_args(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, n: usize, delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return precondition(format!("delta must lie in (0, 1), got {delta}"));
    }
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    if res.m() + 1 < f.range() {
        return precondition("resolution below the exactness regime m >= r - 1");
    }
    if mu.alphabet_size() != f.alphabet_size() {
        return precondition("measure and potential use different alphabets");
    }
    Ok(())
}

/// Katok cover sums: the cheapest cover by Bowen balls carrying μ-mass ≥ 1 − δ.
pub fn katok_cover_sum(
    mu: &MarkovMeasure,
    n: usize,
    alpha: f64,
    res: Resolution,
    delta: f64,
    f: &BlockPotential,
    mode: KatokMode,
) -> Result<SumResult> {
    check_args(mu, f, res, n, delta)?;
    match mode {
        KatokMode::FixedOrder => {
            let len = n + res.m();
            if let Some(v) = exact_fixed_order(mu, f, res, n, alpha, delta)? {
                return Ok(SumResult::exact(v, len));
            }
            let tree = ClassTree::build(mu, f, res, len, None)?;
            let (lp, greedy) = fixed_order_bracket(&tree, len, n, alpha, delta);
            let kind = if (greedy - lp).abs() <= 1e-12 * greedy.abs().max(1e-300) { BoundKind::Exact } else { BoundKind::Bracketed };
            Ok(SumResult { value: lp, depth_cap: len, bound_kind: kind, growth_rate: None, bracket: (lp, greedy) })
        }
        KatokMode::VaryingOrder { depth_cap, q } => {
            let l0 = n + res.m();
            if depth_cap < l0 {
                return precondition(format!("depth cap {depth_cap} is shorter than the root length {l0}"));
            }
            let tree = ClassTree::build(mu, f, res, depth_cap, None)?;
            let (dual, primal) = varying_order_bracket(&tree, n, alpha, delta, depth_cap, q);
            let kind = if (primal - dual).abs() <= 1e-9 * primal.abs().max(1e-300) { BoundKind::Exact } else { BoundKind::Bracketed };
            Ok(SumResult { value: dual, depth_cap, bound_kind: kind, growth_rate: None, bracket: (dual, primal) })
        }
    }
}

/// (LP relaxation, greedy integer cover) for the fixed-order Katok sum over the classes at `len`.
pub(crate) fn fixed_order_bracket(tree: &ClassTree, len: usize, n: usize, alpha: f64, delta: f64) -> (f64, f64) {
    let mut items: Vec<(f64, f64, f64)> = tree.levels[len]
        .iter()
        .map(|c| {
            let w = (-alpha * n as f64 + c.open).exp();
            let m = c.log_mu.exp();
            (w, m, c.count)
        })
        .collect();
    items.sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)).then(b.1.total_cmp(&a.1)));
    let mut need = 1.0 - delta;
    let (mut lp, mut greedy) = (0.0, 0.0);
    let mut greedy_need = need;
    for &(w, m, cnt) in &items {
        if need > 0.0 {
            let take = (need / m).min(cnt);
            lp += take * w;
            need -= take * m;
        }
        if greedy_need > 0.0 {
            let take = (greedy_need / m * (1.0 - 1e-12)).ceil().min(cnt);
            greedy += take * w;
            greedy_need -= take * m;
        }
    }
    (lp, greedy.max(lp))
}

/// Exact min-knapsack when μ is rational and the instance is small.
fn exact_fixed_order(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, n: usize, alpha: f64, delta: f64) -> Result<Option<f64>> {
    let len = n + res.m();
    if !mu.is_exact() || len > EXACT_DP_MAX_LEN {
        return Ok(None);
    }
    let k = mu.alphabet_size();
    let sys = Subshift::full(k)?;
    let mut weights = Vec::new();
    let mut masses = Vec::new();
    for w in sys.words_of_length(len) {
        let p = mu.cylinder_measure_exact(&w).expect("exact measure");
        if p.is_zero() {
            continue;
        }
        weights.push((-alpha * n as f64 + f.birkhoff_sum(w.symbols(), n)?).exp());
        masses.push(p);
    }
    let lcd = masses.iter().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let units: Vec<u128> = match masses.iter().map(|p| (p.numer() * (&lcd / p.denom())).to_u128()).collect::<Option<Vec<_>>>() {
        Some(u) => u,
        None => return Ok(None),
    };
    let total = lcd.to_u128().unwrap_or(u128::MAX);
    // need ≥ ceil((1 − δ)·total) units; δ is read as a float, so use the rational closest to it
    let target = ((1.0 - delta) * total as f64 - 1e-9 * total as f64).ceil().max(0.0) as u128;
    if (units.len() as u128).saturating_mul(target + 1) > EXACT_DP_BUDGET {
        return Ok(None);
    }
    let t = target as usize;
    let mut dp = vec![f64::INFINITY; t + 1];
    dp[0] = 0.0;
    for (u, w) in units.iter().zip(&weights) {
        let u = *u as usize;
        for j in (0..=t).rev() {
            if dp[j].is_finite() {
                let to = (j + u).min(t);
                let cand = dp[j] + w;
                if cand < dp[to] {
                    dp[to] = cand;
                }
            }
        }
    }
    Ok(Some(dp[t]))
}

/// Lagrangian bracket (dual lower bound, feasible primal cost) for the
/// varying-order Katok sum truncated at `depth` symbols.
pub(crate) fn varying_order_bracket(tree: &ClassTree, n: usize, alpha: f64, delta: f64, depth: usize, q: u32) -> (f64, f64) {
    let target = 1.0 - delta;
    let eval = |lam: f64| lagrangian(tree, n, alpha, lam, depth);
    let mut hi = 1.0;
    let mut guard = 0;
    while eval(hi).2 < target {
        hi *= 2.0;
        guard += 1;
        if guard > 2000 {
            break;
        }
    }
    let mut lo = 0.0;
    let steps = 4 * q.max(1) as usize + 16;
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if eval(mid).2 >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (g_hi, cost_hi, _) = eval(hi);
    let (g_lo, _, _) = eval(lo);
    let dual = (g_hi + hi * target).max(g_lo + lo * target);
    (dual.max(0.0), cost_hi)
}

/// Dual lower bound for the varying-order sum with the multiplier searched
/// around `hint`; returns the bound and the multiplier reached.
pub(crate) fn varying_order_dual(tree: &ClassTree, n: usize, alpha: f64, delta: f64, depth: usize, hint: f64) -> (f64, f64) {
    let target = 1.0 - delta;
    let eval = |lam: f64| lagrangian(tree, n, alpha, lam, depth);
    let hint = if hint.is_finite() && hint > 0.0 { hint } else { 1.0 };
    let (mut lo, mut hi) = (hint / 2.0, hint * 2.0);
    let mut v_lo = eval(lo);
    let mut guard = 0;
    while v_lo.2 >= target && guard < 200 {
        hi = lo;
        lo /= 4.0;
        v_lo = eval(lo);
        guard += 1;
    }
    let mut v_hi = eval(hi);
    while v_hi.2 < target && guard < 400 {
        lo = hi;
        v_lo = v_hi;
        hi *= 4.0;
        v_hi = eval(hi);
        guard += 1;
    }
    for _ in 0..40 {
        if hi / lo < 1.0 + 1e-7 {
            break;
        }
        let mid = (lo * hi).sqrt();
        let v = eval(mid);
        if v.2 >= target {
            hi = mid;
            v_hi = v;
        } else {
            lo = mid;
            v_lo = v;
        }
    }
    let dual = (v_hi.0 + hi * target).max(v_lo.0 + lo * target).max(0.0);
    (dual, hi)
}

/// Σ over roots of min(0, own − λμ, Σ children) with the cost and mass of the minimizer.
fn lagrangian(tree: &ClassTree, n: usize, alpha: f64, lam: f64, depth: usize) -> (f64, f64, f64) {
    let m = tree.m;
    let l0 = n + m;
    let mut below: Vec<(f64, f64, f64)> = Vec::new();
    let mut here: Vec<(f64, f64, f64)> = Vec::new();
    for len in (l0..=depth).rev() {
        let scale = (-(alpha - tree.top) * (len - m) as f64).exp();
        here.clear();
        here.extend(tree.levels[len].iter().map(|c| {
            let w = scale * c.w_open;
            let own = w - lam * c.mass;
            let mut best = (0.0, 0.0, 0.0);
            if own < 0.0 {
                best = (own, w, c.mass);
            }
            if len < depth {
                let mut s = (0.0, 0.0, 0.0);
                for &j in &c.children {
                    let b = below[j as usize];
                    s = (s.0 + b.0, s.1 + b.1, s.2 + b.2);
                }
                // prefer the shallower node on ties
                if s.0 < best.0 {
                    best = s;
                }
            }
            best
        }));
        std::mem::swap(&mut below, &mut here);
    }
    tree.levels[l0].iter().zip(&below).fold((0.0, 0.0, 0.0), |acc, (c, v)| {
        (acc.0 + c.count * v.0, acc.1 + c.count * v.1, acc.2 + c.count * v.2)
    })
}

/// Exhaustive fixed-order Katok sum over all subsets of cylinders; tiny instances only.
pub fn brute_force_fixed_order_katok(
    mu: &MarkovMeasure,
    f: &BlockPotential,
    res: Resolution,
    n: usize,
    alpha: f64,
    delta: f64,
) -> Result<f64> {
    let len = n + res.m();
    let sys = Subshift::full(mu.alphabet_size())?;
    let words: Vec<Word> = sys.words_of_length(len).into_iter().filter(|w| mu.log_cylinder_measure(w.symbols()) > f64::NEG_INFINITY).collect();
    if words.len() > 20 {
        return precondition("brute force limited to 20 cylinders");
    }
    let exact: Option<Vec<_>> = words.iter().map(|w| mu.cylinder_measure_exact(w)).collect();
    let weights: Vec<f64> = words.iter().map(|w| (-alpha * n as f64 + f.birkhoff_sum(w.symbols(), n).unwrap()).exp()).collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << words.len()) {
        let chosen = (0..words.len()).filter(|i| mask >> i & 1 == 1);
        let ok = match &exact {
            Some(ps) => {
                let got = chosen.clone().fold(num_rational::BigRational::zero(), |a, i| a + &ps[i]);
                got.to_f64().unwrap() >= 1.0 - delta - 1e-9
            }
            None => chosen.clone().map(|i| words[i].symbols()).map(|s| mu.log_cylinder_measure(s).exp()).sum::<f64>() >= 1.0 - delta - 1e-12,
        };
        if ok {
            best = best.min(chosen.map(|i| weights[i]).sum());
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::rational_from_decimal;
    use crate::symbolic::Subshift;

    fn half() -> MarkovMeasure {
        let h = rational_from_decimal("1/2").unwrap();
        MarkovMeasure::bernoulli_exact(&[h.clone(), h]).unwrap()
    }

    #[test]
    fn fixed_order_examples() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let res = Resolution::new(1).unwrap();
        let r = katok_cover_sum(&half(), 3, 0.0, res, 0.25, &f, KatokMode::FixedOrder).unwrap();
        assert_eq!(r.value, 12.0);
        assert_eq!(r.bound_kind, BoundKind::Exact);
        let r = katok_cover_sum(&half(), 3, 0.0, res, 0.5, &f, KatokMode::FixedOrder).unwrap();
        assert_eq!(r.value, 8.0);
        // float measure goes through the class bracket
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let r = katok_cover_sum(&mu, 3, 0.0, res, 0.25, &f, KatokMode::FixedOrder).unwrap();
        assert!((r.value - 12.0).abs() < 1e-9);
    }

    #[test]
    fn small_delta_saturates() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let res = Resolution::new(1).unwrap();
        let r = katok_cover_sum(&half(), 3, 0.0, res, 1e-6, &f, KatokMode::FixedOrder).unwrap();
        assert_eq!(r.value, 16.0);
    }

    #[test]
    fn delta_outside_unit_interval() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let res = Resolution::new(1).unwrap();
        assert!(katok_cover_sum(&half(), 3, 0.0, res, 0.0, &f, KatokMode::FixedOrder).is_err());
        assert!(katok_cover_sum(&half(), 3, 0.0, res, 1.0, &f, KatokMode::FixedOrder).is_err());
    }

    #[test]
    fn varying_order_uniform_is_flat_at_log2() {
        let sys = Subshift::full(2).unwrap();
        let f = BlockPotential::zero(&sys);
        let res = Resolution::new(1).unwrap();
        let mode = KatokMode::VaryingOrder { depth_cap: 12, q: DEFAULT_Q };
        let r = katok_cover_sum(&half(), 4, 2f64.ln(), res, 0.5, &f, mode).unwrap();
        // every ball costs twice its mass
        assert!((r.value - 1.0).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn brute_force_agrees_on_rationals() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli_exact(&[rational_from_decimal("0.3").unwrap(), rational_from_decimal("0.7").unwrap()]).unwrap();
        let f = BlockPotential::from_symbols(&sys, &[0.0, 1.0]).unwrap();
        let res = Resolution::new(1).unwrap();
        for n in 1..4 {
            for &d in &[0.1, 0.25, 0.5, 0.8] {
                let a = katok_cover_sum(&mu, n, 0.3, res, d, &f, KatokMode::FixedOrder).unwrap().value;
                let b = brute_force_fixed_order_katok(&mu, &f, res, n, 0.3, d).unwrap();
                assert!((a - b).abs() <= 1e-12 * b, "{n} {d} {a} {b}");
            }
        }
    }
}

//! Words whose empirical block statistics sit near a reference measure, and
//! the pressure of the points they describe.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::BoundKind;
use crate::error::{input, precondition, Error, Result};
use crate::estimate::{PressureEstimate, Quantity};
use crate::measures::MarkovMeasure;
use crate::numeric::{least_squares, log_add};
use crate::report::ext_float;
use crate::symbolic::{BlockPotential, Resolution, Subshift, Word};

/// Slack on frequency comparisons so that exact types survive rounding.
const FREQ_SLACK: f64 = 1e-12;

/// A sup-distance ball around the k-block marginals of `reference`.
#[derive(Clone, Debug, PartialEq)]
pub struct NeighborhoodSpec {
    pub k: usize,
    pub eta: f64,
    pub reference: MarkovMeasure,
}

impl NeighborhoodSpec {
    pub fn new(k: usize, eta: f64, reference: MarkovMeasure) -> Result<Self> {
        if k == 0 {
            return input("block length k must be at least 1");
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return input("tolerance eta must be a nonnegative number");
        }
        Ok(NeighborhoodSpec { k, eta, reference })
    }

    fn with_eta(&self, eta: f64) -> Self {
        NeighborhoodSpec { eta, ..self.clone() }
    }
}

/// Membership test on k-block counts, precomputed per alphabet.
struct Ball {
    k: usize,
    alphabet: usize,
    eta: f64,
    /// reference mass of every k-block, by base-K index
    top: Vec<f64>,
    /// (reference mass, k-block indices extending it) for every shorter block
    lower: Vec<(f64, Vec<usize>)>,
}

impl Ball {
    fn new(spec: &NeighborhoodSpec, alphabet: usize) -> Self {
        let k = spec.k;
        let size = alphabet.pow(k as u32);
        let mut top = vec![0.0; size];
        for (w, p) in spec.reference.block_marginal(k) {
            top[index(w.symbols(), alphabet)] = p;
        }
        let mut lower = Vec::new();
        for j in 1..k {
            let tail = alphabet.pow((k - j) as u32);
            for u in 0..alphabet.pow(j as u32) {
                let ext: Vec<usize> = (u * tail..(u + 1) * tail).collect();
                let mass = ext.iter().map(|&v| top[v]).sum();
                lower.push((mass, ext));
            }
        }
        Ball { k, alphabet, eta: spec.eta, top, lower }
    }

    fn contains(&self, counts: &[u32], n: usize) -> bool {
        let nf = n as f64;
        let ok = |c: u32, p: f64| (c as f64 / nf - p).abs() <= self.eta + FREQ_SLACK;
        counts.iter().zip(&self.top).all(|(&c, &p)| ok(c, p))
            && self.lower.iter().all(|(p, ext)| ok(ext.iter().map(|&v| counts[v]).sum(), *p))
    }

    /// Whether some completion of the remaining windows can still land in the ball.
    fn reachable(&self, counts: &[u32], n: usize, remaining: usize) -> bool {
        let nf = n as f64;
        counts.iter().zip(&self.top).all(|(&c, &p)| {
            let c = c as f64;
            c <= nf * (p + self.eta) + FREQ_SLACK * nf && c + remaining as f64 >= nf * (p - self.eta) - FREQ_SLACK * nf
        })
    }
}

fn index(block: &[u8], alphabet: usize) -> usize {
    block.iter().fold(0, |acc, &b| acc * alphabet + b as usize)
}

fn check_reference(sys: &Subshift, spec: &NeighborhoodSpec) -> Result<()> {
    if spec.reference.alphabet_size() != sys.alphabet_size() {
        return input("reference measure and system use different alphabets");
    }
    spec.reference.check_compatible(sys)
}

/// Allowed words of length n+k−1 whose n sliding k-blocks have frequencies
/// within η of the reference marginals (shorter blocks included).
pub fn generic_words(sys: &Subshift, spec: &NeighborhoodSpec, n: usize) -> Result<Vec<Word>> {
    if n < spec.k {
        return precondition("n must be at least the block length k");
    }
    check_reference(sys, spec)?;
    let ball = Ball::new(spec, sys.alphabet_size());
    let len = n + spec.k - 1;
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(len);
    let mut counts = vec![0u32; ball.top.len()];
    collect(sys, &ball, n, len, &mut word, &mut counts, &mut out);
    Ok(out)
}

fn collect(sys: &Subshift, ball: &Ball, n: usize, len: usize, word: &mut Vec<u8>, counts: &mut [u32], out: &mut Vec<Word>) {
    let done = (word.len() + 1).saturating_sub(ball.k);
    if !ball.reachable(counts, n, n - done) {
        return;
    }
    if word.len() == len {
        if ball.contains(counts, n) {
            out.push(Word::new(word.clone()));
        }
        return;
    }
    let next: Vec<u8> = match word.last() {
        None => (0..sys.alphabet_size() as u8).collect(),
        Some(&a) => sys.successors(a).collect(),
    };
    for b in next {
        word.push(b);
        let slot = (word.len() >= ball.k).then(|| index(&word[word.len() - ball.k..], ball.alphabet));
        if let Some(s) = slot {
            counts[s] += 1;
        }
        collect(sys, ball, n, len, word, counts, out);
        if let Some(s) = slot {
            counts[s] -= 1;
        }
        word.pop();
    }
}

/// log of the separated-set pressure of the points whose first n+k−1
/// symbols form a generic word: one point per length-(n+m−1) cylinder,
/// weighted by e^{f_n}. Exact, by dynamic programming over (suffix, counts).
///
/// Returns −∞ when no word qualifies. `state_budget` caps the number of
/// live states at any position.
pub fn log_separated_pressure(
    sys: &Subshift,
    spec: &NeighborhoodSpec,
    f: &BlockPotential,
    n: usize,
    res: Resolution,
    state_budget: usize,
) -> Result<f64> {
    let (k, r, m) = (spec.k, f.range(), res.m());
    if n < k {
        return precondition("n must be at least the block length k");
    }
    if m < k.max(r) {
        return precondition(format!("cylinders of length n+m-1 decide membership and f_n only when m >= max(k, r) = {}", k.max(r)));
    }
    if f.alphabet_size() != sys.alphabet_size() {
        return input("potential and system use different alphabets");
    }
    check_reference(sys, spec)?;
    let ball = Ball::new(spec, sys.alphabet_size());
    let keep = k.max(r).max(2) - 1;
    let len = n + m - 1;
    let generic_end = n + k - 2;
    let mut states: HashMap<(Vec<u8>, Vec<u32>), f64> = HashMap::new();
    states.insert((Vec::new(), vec![0; ball.top.len()]), 0.0);
    let mut window = Vec::with_capacity(keep + 1);
    for idx in 0..len {
        let mut next: HashMap<(Vec<u8>, Vec<u32>), f64> = HashMap::with_capacity(states.len() * 2);
        for ((suffix, counts), lw) in &states {
            let succ: Vec<u8> = match suffix.last() {
                None => (0..sys.alphabet_size() as u8).collect(),
                Some(&a) => sys.successors(a).collect(),
            };
            for b in succ {
                window.clear();
                window.extend_from_slice(suffix);
                window.push(b);
                let mut counts = counts.clone();
                if idx + 1 >= k && idx + 1 - k < n && !counts.is_empty() {
                    counts[index(&window[window.len() - k..], ball.alphabet)] += 1;
                    let done = idx + 2 - k;
                    if !ball.reachable(&counts, n, n - done) {
                        continue;
                    }
                }
                let mut w = *lw;
                if idx + 1 >= r && idx + 1 - r < n {
                    w += f.value(&window[window.len() - r..]);
                }
                let cut = window.len().saturating_sub(keep);
                let key = (window[cut..].to_vec(), counts);
                let e = next.entry(key).or_insert(f64::NEG_INFINITY);
                *e = log_add(*e, w);
            }
        }
        if idx == generic_end {
            // membership is settled; drop the counts and merge
            let mut merged: HashMap<(Vec<u8>, Vec<u32>), f64> = HashMap::new();
            for ((suffix, counts), lw) in next {
                if ball.contains(&counts, n) {
                    let e = merged.entry((suffix, Vec::new())).or_insert(f64::NEG_INFINITY);
                    *e = log_add(*e, lw);
                }
            }
            next = merged;
        }
        if next.len() > state_budget {
            return Err(Error::Budget(format!("{} states at position {idx} (budget {state_budget})", next.len())));
        }
        states = next;
    }
    Ok(states.values().fold(f64::NEG_INFINITY, |a, &b| log_add(a, b)))
}

/// e^{log_separated_pressure}; overflows to +∞ for long words.
pub fn separated_pressure(sys: &Subshift, spec: &NeighborhoodSpec, f: &BlockPotential, n: usize, res: Resolution) -> Result<f64> {
    log_separated_pressure(sys, spec, f, n, res, usize::MAX).map(f64::exp)
}

/// Largest h(q) + Σ q_a f(a) over probability vectors with |q_a − μ_a| ≤ η.
/// This is the exponential growth rate of generic words on a full shift
/// when k = 1 and f depends on one symbol.
pub fn types_exponent(reference: &MarkovMeasure, f: &BlockPotential, eta: f64) -> Result<f64> {
    if f.range() != 1 {
        return precondition("the types exponent needs a one-symbol potential");
    }
    let mu = reference.stationary();
    let lo: Vec<f64> = mu.iter().map(|p| (p - eta).max(0.0)).collect();
    let hi: Vec<f64> = mu.iter().map(|p| (p + eta).min(1.0)).collect();
    let g: Vec<f64> = (0..mu.len()).map(|a| f.value(&[a as u8]).exp()).collect();
    // KKT: q_a = clamp(c·e^{f(a)}, lo_a, hi_a) with Σ q = 1; the sum is monotone in c
    let q_at = |c: f64| -> Vec<f64> { g.iter().zip(lo.iter().zip(&hi)).map(|(g, (l, h))| (c * g).clamp(*l, *h)).collect() };
    let total = |c: f64| q_at(c).iter().sum::<f64>();
    let (mut a, mut b) = (0.0, 1.0);
    while total(b) < 1.0 {
        b *= 2.0;
        if b > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        if total(c) < 1.0 {
            a = c;
        } else {
            b = c;
        }
    }
    let q = q_at(0.5 * (a + b));
    let s: f64 = q.iter().sum();
    Ok(q.iter().enumerate().map(|(i, &x)| {
        let x = x / s;
        let h = if x > 0.0 { -x * x.ln() } else { 0.0 };
        h + x * f.value(&[i as u8])
    }).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateSchedule {
    pub n_list: Vec<usize>,
    /// Shrinking tolerances; the limit is extrapolated to η = 0.
    pub eta_list: Vec<f64>,
    pub m_list: Vec<usize>,
    pub state_budget: usize,
}

impl Default for RateSchedule {
    fn default() -> Self {
        RateSchedule {
            n_list: (100..=800).step_by(100).collect(),
            eta_list: vec![0.04, 0.02, 0.01],
            m_list: vec![1, 2],
            state_budget: 400_000,
        }
    }
}

/// Growth rates at one (m, η).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStage {
    pub m: usize,
    pub eta: f64,
    pub ns: Vec<usize>,
    /// Half-window rates (log S(n) − log S(n/2)) / (n/2); −∞ when a side is empty.
    #[serde(with = "ext_float::vec")]
    pub rates: Vec<f64>,
    /// max over the tail half of the finite rates
    #[serde(with = "ext_float")]
    pub limsup: f64,
    /// Growth rate of the η-neighborhood when a closed form exists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub types_exponent: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericRate {
    pub estimate: PressureEstimate,
    #[serde(with = "ext_float")]
    pub target: f64,
    pub stages: Vec<RateStage>,
    /// Every finite rate sits below target + correction(η) + slack.
    pub sandwich: bool,
}

/// Limsup of (1/n) log of the separated pressure of generic points,
/// extrapolated to η → 0 and read at the finest m.
///
/// When the types exponent is available the large-deviation excess
/// exponent(η) − (h + ∫f) is removed before extrapolating.
pub fn generic_rate(sys: &Subshift, spec: &NeighborhoodSpec, f: &BlockPotential, schedule: &RateSchedule) -> Result<GenericRate> {
    if !spec.reference.is_ergodic() {
        return precondition("the reference measure must be ergodic");
    }
    check_reference(sys, spec)?;
    let floor = spec.k.max(f.range());
    let m_list: Vec<usize> = schedule.m_list.iter().copied().filter(|&m| m >= floor).collect();
    if m_list.is_empty() {
        return precondition(format!("no m in the schedule reaches max(k, r) = {floor}"));
    }
    if schedule.n_list.is_empty() || schedule.eta_list.is_empty() {
        return precondition("rate schedules must be nonempty");
    }
    if schedule.n_list.windows(2).any(|w| w[0] >= w[1]) || schedule.n_list[0] < 2 * spec.k {
        return precondition("n schedule must increase and start at 2k or more");
    }
    let target = spec.reference.free_energy(f);
    let closed_form = spec.k == 1 && f.range() == 1 && sys.matrix().iter().flatten().all(|&v| v != 0);
    let mut flags = Vec::new();
    let mut stages = Vec::new();
    let mut exhausted = false;
    for &m in &m_list {
        let res = Resolution::new(m)?;
        for &eta in &schedule.eta_list {
            let sp = spec.with_eta(eta);
            let mut ns = Vec::new();
            let mut rates = Vec::new();
            for &n in &schedule.n_list {
                let both = log_separated_pressure(sys, &sp, f, n, res, schedule.state_budget)
                    .and_then(|a| Ok((a, log_separated_pressure(sys, &sp, f, n / 2, res, schedule.state_budget)?)));
                match both {
                    Ok((full, half)) => {
                        let rate = if full.is_finite() && half.is_finite() { (full - half) / (n - n / 2) as f64 } else { f64::NEG_INFINITY };
                        ns.push(n);
                        rates.push(rate);
                    }
                    Err(Error::Budget(_)) => {
                        exhausted = true;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
            let tail: Vec<f64> = rates[rates.len() / 2..].iter().copied().filter(|r| r.is_finite()).collect();
            let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let types_exponent = if closed_form { Some(types_exponent(&spec.reference, f, eta)?) } else { None };
            stages.push(RateStage { m, eta, ns, rates, limsup, types_exponent });
        }
    }
    if exhausted {
        flags.push("budget-exhausted".to_string());
    }
    if stages.iter().all(|s| !s.limsup.is_finite()) {
        let mut est = PressureEstimate::empty_set(Quantity::GenericRate, "no generic words at any stage");
        est.flags.extend(flags);
        return Ok(GenericRate { estimate: est, target, stages, sandwich: true });
    }
    if closed_form {
        flags.push("types-correction".to_string());
    } else {
        flags.push("no-types-correction".to_string());
    }
    // per m: corrected rates against η, linear fit to η = 0
    let mut per_m = Vec::new();
    for &m in &m_list {
        let pts: Vec<(f64, f64)> = stages
            .iter()
            .filter(|s| s.m == m && s.limsup.is_finite())
            .map(|s| (s.eta, s.limsup - s.types_exponent.map_or(0.0, |x| x - target)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        let smallest = ys[ys.len() - 1];
        let (at_zero, rms) = if xs.len() >= 2 && xs.iter().any(|&x| x != xs[0]) {
            least_squares(&xs, &ys, &[|_| 1.0, |x| x]).map(|(c, rms)| (c[0], rms)).unwrap_or((smallest, 0.0))
        } else {
            (smallest, 0.0)
        };
        per_m.push((at_zero, smallest, rms));
    }
    let &(value, _, _) = per_m.last().expect("some stage is finite");
    let (mut lo, mut hi) = (value, value);
    for (a, s, rms) in &per_m {
        lo = lo.min(*a - 3.0 * rms).min(*s);
        hi = hi.max(*a + 3.0 * rms).max(*s);
    }
    let slack = if exhausted { 0.05 } else { 0.005 };
    // with a closed form, no finite-n rate may exceed the neighborhood exponent
    let sandwich = stages.iter().all(|s| match s.types_exponent {
        Some(e) => s.rates[s.rates.len() / 2..].iter().all(|&r| r <= e + 0.02),
        None => true,
    });
    let estimate = PressureEstimate {
        quantity: Quantity::GenericRate,
        value,
        bracket: (lo - slack, hi + slack),
        epsilon_schedule: m_list.clone(),
        n_schedule: schedule.n_list.clone(),
        delta_schedule: Vec::new(),
        bound_kind: BoundKind::Bracketed,
        provenance: format!(
            "half-window rates of generic separated sums, k={}, eta {:?} extrapolated to 0",
            spec.k, schedule.eta_list
        ),
        flags,
        stages: Vec::new(),
    };
    Ok(GenericRate { estimate, target, stages, sandwich })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenericPackingReport {
    pub estimate: PressureEstimate,
    /// Upper side, from the generic-word growth rate.
    #[serde(with = "ext_float::pair")]
    pub upper: (f64, f64),
    /// Lower side: h_μ + ∫f dμ.
    #[serde(with = "ext_float")]
    pub lower: f64,
    #[serde(with = "ext_float")]
    pub tolerance: f64,
    pub agreement: bool,
    pub rate: GenericRate,
}

/// Packing pressure of the generic points of μ, bounded above by the growth
/// rate of generic words and below by h_μ + ∫f dμ.
pub fn generic_packing_check(
    sys: &Subshift,
    mu: &MarkovMeasure,
    f: &BlockPotential,
    k: usize,
    schedule: &RateSchedule,
    tolerance: f64,
) -> Result<GenericPackingReport> {
    if !mu.is_ergodic() {
        return precondition("generic points are checked for ergodic measures only");
    }
    let spec = NeighborhoodSpec::new(k, schedule.eta_list.first().copied().unwrap_or(0.0), mu.clone())?;
    let rate = generic_rate(sys, &spec, f, schedule)?;
    let lower = rate.target;
    let upper = rate.estimate.bracket;
    let value = rate.estimate.value;
    let mut flags = vec!["upper:generic-rate".to_string(), "lower:entropy-integral".to_string()];
    flags.extend(rate.estimate.flags.iter().cloned());
    let agreement = (value - lower).abs() <= tolerance && upper.1 >= lower - tolerance;
    let estimate = PressureEstimate {
        quantity: Quantity::GenericPacking,
        value,
        bracket: (lower.min(upper.0), upper.1.max(lower)),
        epsilon_schedule: rate.estimate.epsilon_schedule.clone(),
        n_schedule: rate.estimate.n_schedule.clone(),
        delta_schedule: Vec::new(),
        bound_kind: BoundKind::Bracketed,
        provenance: format!("upper from generic-word rate, lower h+int f = {lower:.6}"),
        flags,
        stages: Vec::new(),
    };
    Ok(GenericPackingReport { estimate, upper, lower, tolerance, agreement, rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{binary_entropy, binomial_row};

    fn full2() -> Subshift {
        Subshift::full(2).unwrap()
    }

    fn bern(p1: f64) -> MarkovMeasure {
        MarkovMeasure::bernoulli(&[1.0 - p1, p1]).unwrap()
    }

    fn res(m: usize) -> Resolution {
        Resolution::new(m).unwrap()
    }

    #[test]
    fn word_examples() {
        let x = full2();
        let spec = NeighborhoodSpec::new(1, 0.0, bern(0.5)).unwrap();
        assert_eq!(generic_words(&x, &spec, 4).unwrap().len(), 6);
        let all = NeighborhoodSpec::new(1, 1.0, bern(0.5)).unwrap();
        assert_eq!(generic_words(&x, &all, 5).unwrap().len(), 32);
        let point = NeighborhoodSpec::new(1, 0.0, bern(0.0)).unwrap();
        assert_eq!(generic_words(&x, &point, 6).unwrap(), vec![Word::parse("000000").unwrap()]);
        assert!(generic_words(&x, &NeighborhoodSpec::new(3, 0.1, bern(0.5)).unwrap(), 2).is_err());
    }

    #[test]
    fn separated_examples() {
        let x = full2();
        let zero = BlockPotential::zero(&x);
        let spec = NeighborhoodSpec::new(1, 0.1, bern(0.5)).unwrap();
        let row = binomial_row(10);
        let expect: f64 = (4..=6).map(|j| row[j].to_string().parse::<f64>().unwrap()).sum();
        assert!((separated_pressure(&x, &spec, &zero, 10, res(1)).unwrap() - expect).abs() < 1e-9);
        let all = NeighborhoodSpec::new(1, 1.0, bern(0.5)).unwrap();
        assert!((separated_pressure(&x, &all, &zero, 7, res(3)).unwrap() - 512.0).abs() < 1e-9);
        let c = BlockPotential::constant(&x, 0.3);
        let a = separated_pressure(&x, &spec, &c, 10, res(1)).unwrap();
        assert!((a / expect - (0.3f64 * 10.0).exp()).abs() < 1e-9);
        assert!(log_separated_pressure(&x, &spec, &BlockPotential::new(&x, 2, vec![0.0; 4]).unwrap(), 10, res(1), 100).is_err());
    }

    #[test]
    fn dynamic_program_matches_enumeration() {
        let g = Subshift::golden_mean();
        let mu = MarkovMeasure::markov(&[vec![0.5, 0.5], vec![1.0, 0.0]], None).unwrap();
        let f = BlockPotential::new(&g, 2, vec![0.1, -0.4, 0.7, 0.0]).unwrap();
        for k in 1..=2 {
            let spec = NeighborhoodSpec::new(k, 0.15, mu.clone()).unwrap();
            for m in 2..=3 {
                let n = 9;
                let len = n + m - 1;
                let brute: f64 = g
                    .words_of_length(len)
                    .iter()
                    .filter(|w| generic_words(&g, &spec, n).unwrap().contains(&w.prefix(n + k - 1)))
                    .map(|w| f.birkhoff_sum(w.symbols(), n).unwrap().exp())
                    .sum();
                let dp = separated_pressure(&g, &spec, &f, n, res(m)).unwrap();
                assert!((dp - brute).abs() <= 1e-9 * brute, "k={k} m={m} {dp} {brute}");
            }
        }
    }

    #[test]
    fn exact_type_counts_follow_entropy() {
        let x = full2();
        for n in 1..=30usize {
            let row = binomial_row(n);
            for j in 0..=n {
                let spec = NeighborhoodSpec::new(1, 0.0, bern(j as f64 / n as f64)).unwrap();
                let count = separated_pressure(&x, &spec, &BlockPotential::zero(&x), n, res(1)).unwrap().round();
                assert_eq!(count.to_string(), row[j].to_string());
                if n <= 12 {
                    assert_eq!(generic_words(&x, &spec, n).unwrap().len() as f64, count);
                }
                let h = binary_entropy(j as f64 / n as f64);
                assert!((count.ln() / n as f64 - h).abs() <= 2.0 * ((n + 1) as f64).ln() / n as f64);
            }
        }
    }

    #[test]
    fn types_exponent_examples() {
        let x = full2();
        let f = BlockPotential::from_symbols(&x, &[0.0, 1.0]).unwrap();
        let e = types_exponent(&bern(0.3), &f, 0.0).unwrap();
        assert!((e - (binary_entropy(0.3) + 0.3)).abs() < 1e-12);
        let e = types_exponent(&bern(0.3), &f, 0.05).unwrap();
        assert!((e - (binary_entropy(0.35) + 0.35)).abs() < 1e-9);
        let e = types_exponent(&bern(0.5), &BlockPotential::zero(&x), 0.2).unwrap();
        assert!((e - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_exact_types_are_skipped() {
        let x = full2();
        let spec = NeighborhoodSpec::new(1, 0.0, bern(0.3)).unwrap();
        assert_eq!(log_separated_pressure(&x, &spec, &BlockPotential::zero(&x), 7, res(1), usize::MAX).unwrap(), f64::NEG_INFINITY);
        let sched = RateSchedule { n_list: vec![20, 30, 40, 50], eta_list: vec![0.0], ..RateSchedule::default() };
        let r = generic_rate(&x, &spec, &BlockPotential::zero(&x), &sched).unwrap();
        assert!(r.stages.iter().all(|s| s.rates.iter().any(|r| !r.is_finite())));
        assert!((r.estimate.value - binary_entropy(0.3)).abs() < 0.1, "{:?}", r.estimate);
    }

    #[test]
    fn non_ergodic_reference_is_rejected() {
        let x = full2();
        let mix = MarkovMeasure::markov(&[vec![1.0, 0.0], vec![0.0, 1.0]], Some(vec![0.5, 0.5])).unwrap();
        let spec = NeighborhoodSpec::new(1, 0.1, mix).unwrap();
        assert!(generic_rate(&x, &spec, &BlockPotential::zero(&x), &RateSchedule::default()).is_err());
    }

    #[test]
    fn packing_check_examples() {
        let x = full2();
        let zero = BlockPotential::zero(&x);
        let r = generic_packing_check(&x, &bern(0.5), &zero, 1, &RateSchedule::default(), 0.05).unwrap();
        assert!(r.agreement && (r.estimate.value - 2f64.ln()).abs() < 0.05, "{:?}", r.estimate);
        let r = generic_packing_check(&x, &bern(0.0), &zero, 1, &RateSchedule::default(), 0.02).unwrap();
        assert!(r.agreement && r.estimate.value.abs() < 0.02, "{:?}", r.estimate);
        assert!(r.estimate.flags.iter().any(|f| f == "upper:generic-rate"));
    }
}

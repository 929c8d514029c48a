use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::markov::MarkovMeasure;
use crate::error::{precondition, Result};
use crate::symbolic::{open_ball_len, BlockPotential, Resolution, Word};

fn draw(rng: &mut ChaCha8Rng, probs: impl Iterator<Item = f64>) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0u8;
    for (i, p) in probs.enumerate() {
        if p > 0.0 {
            last_positive = i as u8;
            acc += p;
            if u < acc {
                return i as u8;
            }
        }
    }
    last_positive
}

/// A length-n word drawn from the stationary chain; deterministic per seed.
pub fn sample_orbit(mu: &MarkovMeasure, seed: u64, n: usize) -> Result<Word> {
    if n == 0 {
        return precondition("orbit length must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = mu.alphabet_size();
    let mut out = Vec::with_capacity(n);
    let mut a = draw(&mut rng, mu.stationary().iter().copied());
    out.push(a);
    for _ in 1..n {
        a = draw(&mut rng, (0..k as u8).map(|b| mu.transition(a, b)));
        out.push(a);
    }
    Ok(Word::new(out))
}

/// Sliding-window block statistics of a word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    pub block_length: usize,
    pub windows: usize,
    pub counts: BTreeMap<Word, usize>,
}

impl EmpiricalDistribution {
    pub fn frequency(&self, block: &Word) -> f64 {
        self.counts.get(block).copied().unwrap_or(0) as f64 / self.windows as f64
    }

    pub fn frequencies(&self) -> BTreeMap<Word, f64> {
        self.counts.iter().map(|(w, c)| (w.clone(), *c as f64 / self.windows as f64)).collect()
    }
}

pub fn empirical_distribution(w: &Word, k: usize) -> Result<EmpiricalDistribution> {
    if k == 0 || w.len() < k {
        return precondition(format!("word of length {} has no blocks of length {k}", w.len()));
    }
    let mut counts = BTreeMap::new();
    for b in w.symbols().windows(k) {
        *counts.entry(Word::from(b)).or_insert(0) += 1;
    }
    Ok(EmpiricalDistribution { block_length: k, windows: w.len() - k + 1, counts })
}

/// a_n = (−log μ(B_n(x, 2^-m)) + f_n(x)) / n for n = 1..N, where x is any point
/// starting with `w` and N is the largest order the prefix determines.
/// Entries are +∞ once the ball has measure zero.
pub fn local_pressure_sequence(
    mu: &MarkovMeasure,
    f: &BlockPotential,
    w: &Word,
    res: Resolution,
) -> Result<Vec<f64>> {
    let s = w.symbols();
    let m = res.m();
    let r = f.range();
    let n_max = s.len().saturating_sub(m).min((s.len() + 1).saturating_sub(r));
    if n_max == 0 {
        return precondition("word too short for a single local pressure term");
    }
    // prefix log-measures
    let mut log_mu = Vec::with_capacity(s.len() + 1);
    log_mu.push(0.0f64);
    for i in 0..s.len() {
        let next = if i == 0 {
            let p = mu.stationary()[s[0] as usize];
            if p > 0.0 { p.ln() } else { f64::NEG_INFINITY }
        } else {
            log_mu[i] + mu.log_transition(s[i - 1], s[i])
        };
        log_mu.push(next);
    }
    let mut out = Vec::with_capacity(n_max);
    let mut fsum = crate::numeric::CompensatedSum::new();
    for n in 1..=n_max {
        fsum.add(f.value(&s[n - 1..n - 1 + r]));
        let lm = log_mu[open_ball_len(n, res)];
        out.push(if lm == f64::NEG_INFINITY { f64::INFINITY } else { (-lm + fsum.value()) / n as f64 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Subshift;

    #[test]
    fn deterministic_and_degenerate() {
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        assert_eq!(sample_orbit(&mu, 7, 50).unwrap(), sample_orbit(&mu, 7, 50).unwrap());
        assert_ne!(sample_orbit(&mu, 7, 50).unwrap(), sample_orbit(&mu, 8, 50).unwrap());
        let point = MarkovMeasure::bernoulli(&[1.0, 0.0]).unwrap();
        assert!(sample_orbit(&point, 3, 40).unwrap().symbols().iter().all(|&b| b == 0));
    }

    #[test]
    fn frequencies_converge() {
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let w = sample_orbit(&mu, 11, 100_000).unwrap();
        let e = empirical_distribution(&w, 1).unwrap();
        assert!((e.frequency(&Word::parse("1").unwrap()) - 0.5).abs() < 0.01);
    }

    #[test]
    fn empirical_examples() {
        let e = empirical_distribution(&Word::parse("0101").unwrap(), 1).unwrap();
        assert_eq!(e.frequency(&Word::parse("0").unwrap()), 0.5);
        let e2 = empirical_distribution(&Word::parse("0011").unwrap(), 2).unwrap();
        assert_eq!(e2.windows, 3);
        assert!((e2.frequency(&Word::parse("01").unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        assert!(empirical_distribution(&Word::parse("0").unwrap(), 2).is_err());
    }

    #[test]
    fn closed_form_local_pressure() {
        let x = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let w = sample_orbit(&mu, 1, 40).unwrap();
        let seq = local_pressure_sequence(&mu, &BlockPotential::zero(&x), &w, Resolution::new(2).unwrap()).unwrap();
        assert!((seq[9] - 12.0 * 2f64.ln() / 10.0).abs() < 1e-12);
        let point = MarkovMeasure::bernoulli(&[1.0, 0.0]).unwrap();
        let off = local_pressure_sequence(&point, &BlockPotential::zero(&x), &Word::parse("0010").unwrap(), Resolution::new(1).unwrap()).unwrap();
        assert!(off[0].is_finite());
        assert_eq!(off[2], f64::INFINITY);
    }
}

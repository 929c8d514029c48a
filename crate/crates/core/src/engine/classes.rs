//! Words of the support of a Markov measure grouped into classes that share
//! the last m+1 symbols, the ball weight exponent and the log-measure. Every
//! word of a class has the same children classes, so tree recursions over
//! covers and antichains run over classes with multiplicities.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::measures::MarkovMeasure;
use crate::symbolic::{BlockPotential, Resolution};

/// Merge resolution for the class values.
const QUANTUM: f64 = 1e-9;
/// Upper limit on the number of classes in one level.
pub(crate) const MAX_LEVEL_CLASSES: usize = 400_000;

#[derive(Clone, Debug, Default)]
pub(crate) struct Class {
    pub count: f64,
    /// f_{L−m} of every word in the class (open-ball weight exponent); 0 while L ≤ m.
    pub open: f64,
    /// f_{L−m+1} (closed-ball weight exponent) when defined.
    pub closed: f64,
    /// log μ of every word in the class.
    pub log_mu: f64,
    pub suffix: u32,
    pub children: Vec<u32>,
    /// e^{open − (L−m)·top}, e^{closed − (L−m+1)·top} and μ, filled in once the tree is built.
    pub w_open: f64,
    pub w_closed: f64,
    pub mass: f64,
}

/// One-sided band: keep a class at length L iff −log μ + f_{L−m} stays below
/// L·(center + scale/√L). Every kept word then satisfies e^{f} ≤ μ·e^{L·center + scale√L},
/// so sums over kept words are controlled by the mass they carry.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Band {
    pub center: f64,
    pub scale: f64,
}

impl Band {
    pub fn width(&self, len: usize) -> f64 {
        self.scale / (len as f64).sqrt()
    }

    fn keeps(&self, len: usize, c: &Class) -> bool {
        (-c.log_mu + c.open) / len as f64 - self.center <= self.width(len) + 1e-12
    }
}

pub(crate) struct ClassTree {
    pub m: usize,
    /// levels[L] holds the classes of words of length L (levels[0] is empty).
    pub levels: Vec<Vec<Class>>,
    /// max f; ball weights are stored relative to e^{order·top} so they never overflow.
    pub top: f64,
}

impl ClassTree {
    /// Classes of the support of μ down to length `depth`, optionally cut to a band.
    pub fn build(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, depth: usize, band: Option<Band>) -> Result<Self> {
        Self::build_from(mu, f, res, depth, band, &[])
    }

    /// As [`ClassTree::build`] but restricted to words starting with `prefix`.
    pub fn build_from(
        mu: &MarkovMeasure,
        f: &BlockPotential,
        res: Resolution,
        depth: usize,
        band: Option<Band>,
        prefix: &[u8],
    ) -> Result<Self> {
        let m = res.m();
        let k = mu.alphabet_size();
        let r = f.range();
        if m + 1 < r {
            return Err(Error::Precondition(format!("resolution m = {m} is below r − 1 = {}", r - 1)));
        }
        let s = m + 1;
        let modulus = (k as u32).pow(s as u32);
        let mut levels: Vec<Vec<Class>> = vec![Vec::new()];
        // explicit words until the prefix is consumed
        let start = prefix.len().max(1);
        let mut words: Vec<Vec<u8>> = if prefix.is_empty() { (0..k as u8).map(|a| vec![a]).collect() } else { vec![prefix.to_vec()] };
        words.retain(|w| mu.log_cylinder_measure(w) > f64::NEG_INFINITY);
        for _ in 1..start {
            levels.push(Vec::new());
        }
        let mut first = Vec::new();
        for w in &words {
            let c = Self::class_of(mu, f, m, k, modulus, w);
            if band.map_or(true, |b| b.keeps(w.len(), &c)) {
                first.push(c);
            }
        }
        levels.push(first);
        for len in start..depth {
            let cur = &levels[len];
            let mut next: Vec<Class> = Vec::new();
            let mut index: HashMap<(u32, i64, i64), u32> = HashMap::new();
            let mut links: Vec<Vec<u32>> = Vec::with_capacity(cur.len());
            for c in cur {
                let last = (c.suffix % k as u32) as u8;
                let mut kids = Vec::new();
                for b in 0..k as u8 {
                    let lp = mu.log_transition(last, b);
                    if lp == f64::NEG_INFINITY {
                        continue;
                    }
                    let suffix = (c.suffix * k as u32 + b as u32) % modulus;
                    let new_len = len + 1;
                    let digits = suffix_digits(suffix, k, s, new_len);
                    let open = if new_len > m { c.open + f.value(&window(&digits, new_len, new_len - m - 1, r)) } else { 0.0 };
                    let closed = if new_len + 1 > m && r <= m { open + f.value(&window(&digits, new_len, new_len - m, r)) } else { f64::NAN };
                    let child = Class { count: c.count, open, closed, log_mu: c.log_mu + lp, suffix, ..Class::default() };
                    if let Some(bd) = band {
                        if !bd.keeps(new_len, &child) {
                            continue;
                        }
                    }
                    let key = (suffix, (open / QUANTUM).round() as i64, (child.log_mu / QUANTUM).round() as i64);
                    let idx = *index.entry(key).or_insert_with(|| {
                        next.push(Class { count: 0.0, ..child.clone() });
                        (next.len() - 1) as u32
                    });
                    next[idx as usize].count += c.count;
                    kids.push(idx);
                }
                links.push(kids);
            }
            if next.len() > MAX_LEVEL_CLASSES {
                return Err(Error::Budget(format!("{} classes at length {}", next.len(), len + 1)));
            }
            for (c, kids) in levels[len].iter_mut().zip(links) {
                c.children = kids;
            }
            levels.push(next);
        }
        let top = f.max_value();
        for (len, level) in levels.iter_mut().enumerate() {
            for c in level.iter_mut() {
                let order = len.saturating_sub(m) as f64;
                c.w_open = (c.open - order * top).exp();
                c.w_closed = (c.closed - (order + 1.0) * top).exp();
                c.mass = c.log_mu.exp();
            }
        }
        Ok(ClassTree { m, levels, top })
    }

    fn class_of(mu: &MarkovMeasure, f: &BlockPotential, m: usize, k: usize, modulus: u32, w: &[u8]) -> Class {
        let len = w.len();
        let r = f.range();
        let open = if len > m { f.birkhoff_sum(w, len - m).unwrap_or(0.0) } else { 0.0 };
        let closed = if len + 1 > m && r <= m { f.birkhoff_sum(w, len - m + 1).unwrap_or(f64::NAN) } else { f64::NAN };
        let suffix = w.iter().fold(0u32, |acc, &b| (acc * k as u32 + b as u32) % modulus);
        Class { count: 1.0, open, closed, log_mu: mu.log_cylinder_measure(w), suffix, ..Class::default() }
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// μ of the words kept at length `len`.
    pub fn mass(&self, len: usize) -> f64 {
        self.levels[len].iter().map(|c| c.count * c.mass).sum()
    }
}

/// The last min(s, len) symbols of a word from its suffix code, left-padded with 0.
fn suffix_digits(mut code: u32, k: usize, s: usize, len: usize) -> Vec<u8> {
    let mut d = vec![0u8; s];
    for i in (0..s).rev() {
        d[i] = (code % k as u32) as u8;
        code /= k as u32;
    }
    let _ = len;
    d
}

/// The r-block starting at absolute position `pos` of a word of length `len`, read from its suffix digits.
fn window(digits: &[u8], len: usize, pos: usize, r: usize) -> Vec<u8> {
    let s = digits.len();
    let offset = s + pos - len;
    digits[offset..offset + r].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Subshift;

    #[test]
    fn counts_match_binomials() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        let f = BlockPotential::from_symbols(&sys, &[0.0, 1.0]).unwrap();
        let t = ClassTree::build(&mu, &f, Resolution::new(2).unwrap(), 10, None).unwrap();
        for len in 1..=10 {
            let total: f64 = t.levels[len].iter().map(|c| c.count).sum();
            assert_eq!(total, (1u64 << len) as f64);
            assert!((t.mass(len) - 1.0).abs() < 1e-12);
        }
        // open weight of every class is the number of ones among the first L − m symbols
        for c in &t.levels[7] {
            assert!((c.open - c.open.round()).abs() < 1e-12 && c.open <= 5.0);
        }
    }

    #[test]
    fn weights_agree_with_words() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::markov(&[vec![0.6, 0.4], vec![0.2, 0.8]], None).unwrap();
        let f = BlockPotential::new(&sys, 2, vec![0.1, -0.4, 0.7, 0.3]).unwrap();
        let res = Resolution::new(2).unwrap();
        let t = ClassTree::build(&mu, &f, res, 8, None).unwrap();
        // brute force: multiset of (open, closed, log μ) at length 8
        let mut brute: Vec<(i64, i64, i64)> = sys
            .words_of_length(8)
            .iter()
            .map(|w| {
                let s = w.symbols();
                let q = |x: f64| (x * 1e6).round() as i64;
                (q(f.birkhoff_sum(s, 6).unwrap()), q(f.birkhoff_sum(s, 7).unwrap()), q(mu.log_cylinder_measure(s)))
            })
            .collect();
        brute.sort();
        let mut mine: Vec<(i64, i64, i64)> = Vec::new();
        for c in &t.levels[8] {
            let q = |x: f64| (x * 1e6).round() as i64;
            for _ in 0..c.count as usize {
                mine.push((q(c.open), q(c.closed), q(c.log_mu)));
            }
        }
        mine.sort();
        assert_eq!(brute, mine);
    }
}

use serde::{Deserialize, Serialize};

use super::word::{Word, MAX_ALPHABET};
use crate::error::{input, precondition, Result};

/// A one-sided subshift of finite type given by a 0/1 transition matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subshift {
    k: usize,
    allowed: Vec<bool>,
    irreducible: bool,
}

impl Subshift {
    pub fn new(matrix: &[Vec<u8>]) -> Result<Self> {
        let k = matrix.len();
        if k < 2 {
            return input("alphabet must have at least two symbols");
        }
        if k > MAX_ALPHABET {
            return input(format!("alphabet larger than {MAX_ALPHABET} is not supported"));
        }
        let mut allowed = vec![false; k * k];
        for (a, row) in matrix.iter().enumerate() {
            if row.len() != k {
                return input(format!("transition row {a} has length {} (expected {k})", row.len()));
            }
            for (b, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => allowed[a * k + b] = true,
                    _ => return input(format!("transition entry ({a},{b}) must be 0 or 1")),
                }
            }
        }
        for a in 0..k {
            if !(0..k).any(|b| allowed[a * k + b]) {
                return input(format!("symbol {a} has no outgoing transition"));
            }
            if !(0..k).any(|b| allowed[b * k + a]) {
                return input(format!("symbol {a} has no incoming transition"));
            }
        }
        let irreducible = strongly_connected(k, &allowed);
        Ok(Subshift { k, allowed, irreducible })
    }

    pub fn full(k: usize) -> Result<Self> {
        Self::new(&vec![vec![1u8; k]; k])
    }

    /// The shift on {0,1} forbidding "11".
    pub fn golden_mean() -> Self {
        Self::new(&[vec![1, 1], vec![1, 0]]).expect("valid matrix")
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn allows(&self, a: u8, b: u8) -> bool {
        self.allowed[a as usize * self.k + b as usize]
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|a| (0..self.k).map(|b| self.allowed[a * self.k + b] as u8).collect())
            .collect()
    }

    pub fn successors(&self, a: u8) -> impl Iterator<Item = u8> + '_ {
        (0..self.k as u8).filter(move |&b| self.allows(a, b))
    }

    /// Symbols that may follow the word (all symbols for the empty word).
    pub fn next_symbols(&self, w: &[u8]) -> Vec<u8> {
        match w.last() {
            None => (0..self.k as u8).collect(),
            Some(&a) => self.successors(a).collect(),
        }
    }

    pub fn is_allowed(&self, w: &[u8]) -> bool {
        w.iter().all(|&b| (b as usize) < self.k) && w.windows(2).all(|p| self.allows(p[0], p[1]))
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        if self.is_allowed(w.symbols()) {
            Ok(())
        } else {
            precondition(format!("word {w} is not in the language of the subshift"))
        }
    }

    /// All allowed words of length `n` in lexicographic order.
    pub fn words_of_length(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.collect_words(n, &mut buf, &mut out);
        out
    }

    fn collect_words(&self, n: usize, buf: &mut Vec<u8>, out: &mut Vec<Word>) {
        if buf.len() == n {
            out.push(Word::new(buf.clone()));
            return;
        }
        for b in self.next_symbols(buf) {
            buf.push(b);
            self.collect_words(n, buf, out);
            buf.pop();
        }
    }

    /// Number of allowed words of length `n`, via the transition-matrix recurrence.
    pub fn count_words(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let mut v = vec![1u128; self.k];
        for _ in 1..n {
            let mut next = vec![0u128; self.k];
            for a in 0..self.k {
                for b in 0..self.k {
                    if self.allowed[a * self.k + b] {
                        next[b] = next[b].saturating_add(v[a]);
                    }
                }
            }
            v = next;
        }
        v.iter().fold(0u128, |s, x| s.saturating_add(*x))
    }
}

pub(crate) fn strongly_connected(k: usize, allowed: &[bool]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..k {
                let edge = if forward { allowed[a * k + b] } else { allowed[b * k + a] };
                if edge && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// The resolution ε = 2^{-m}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Resolution(usize);

impl Resolution {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return precondition("resolution exponent m must be at least 1");
        }
        Ok(Resolution(m))
    }

    pub fn m(self) -> usize {
        self.0
    }

    pub fn epsilon(self) -> f64 {
        (2.0f64).powi(-(self.0 as i32))
    }

    /// Inverse of [`Resolution::epsilon`]; only dyadic values are accepted.
    pub fn from_epsilon(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return precondition(format!("epsilon {eps} outside (0,1)"));
        }
        let m = (-eps.log2()).round();
        if (2.0f64).powi(-(m as i32)) != eps {
            return precondition(format!("epsilon {eps} is not a power of 1/2"));
        }
        Self::new(m as usize)
    }
}

impl TryFrom<usize> for Resolution {
    type Error = crate::error::Error;
    fn try_from(m: usize) -> Result<Self> {
        Self::new(m)
    }
}

impl From<Resolution> for usize {
    fn from(r: Resolution) -> usize {
        r.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_counts_are_fibonacci() {
        let g = Subshift::golden_mean();
        assert_eq!(g.words_of_length(4).len(), 8);
        let fib = [2u128, 3, 5, 8, 13, 21, 34];
        for (i, f) in fib.iter().enumerate() {
            assert_eq!(g.count_words(i + 1), *f);
        }
    }

    #[test]
    fn stranded_symbol_rejected() {
        assert!(Subshift::new(&[vec![1, 0], vec![0, 0]]).is_err());
    }

    #[test]
    fn resolution_round_trip() {
        assert!(Resolution::new(0).is_err());
        let r = Resolution::new(3).unwrap();
        assert_eq!(r.epsilon(), 0.125);
        assert_eq!(Resolution::from_epsilon(0.125).unwrap(), r);
        assert!(Resolution::from_epsilon(0.3).is_err());
    }

    #[test]
    fn reducible_flag() {
        let s = Subshift::new(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!s.is_irreducible());
        assert!(Subshift::golden_mean().is_irreducible());
    }
}

use super::subshift::{Resolution, Subshift};
use super::word::Word;
use crate::error::{input, Error, Result};
use crate::numeric::CompensatedSum;

/// A locally constant potential depending on the first `range` coordinates.
///
/// The table is indexed by the base-k value of the block; entries of blocks
/// that are not allowed in the subshift are stored as zero and never read.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPotential {
    k: usize,
    range: usize,
    table: Vec<f64>,
    allowed: Vec<bool>,
}

impl BlockPotential {
    pub fn new(sys: &Subshift, range: usize, table: Vec<f64>) -> Result<Self> {
        let k = sys.alphabet_size();
        if range == 0 {
            return input("potential range must be at least 1");
        }
        let size = k
            .checked_pow(range as u32)
            .filter(|s| *s <= 1 << 22)
            .ok_or_else(|| Error::Input(format!("potential range {range} too large")))?;
        if table.len() != size {
            return input(format!("potential table has {} entries, expected {size}", table.len()));
        }
        let mut allowed = vec![false; size];
        let mut table = table;
        for (idx, slot) in allowed.iter_mut().enumerate() {
            let block = block_of(idx, k, range);
            *slot = sys.is_allowed(&block);
            if *slot {
                if !table[idx].is_finite() {
                    return input(format!("potential entry for block {} is not finite", Word::new(block)));
                }
            } else {
                table[idx] = 0.0;
            }
        }
        Ok(BlockPotential { k, range, table, allowed })
    }

    pub fn zero(sys: &Subshift) -> Self {
        Self::constant(sys, 0.0)
    }

    pub fn constant(sys: &Subshift, c: f64) -> Self {
        Self::new(sys, 1, vec![c; sys.alphabet_size()]).expect("constant potential")
    }

    /// Range-one potential from per-symbol values.
    pub fn from_symbols(sys: &Subshift, values: &[f64]) -> Result<Self> {
        Self::new(sys, 1, values.to_vec())
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn value(&self, block: &[u8]) -> f64 {
        self.table[index_of(block, self.k)]
    }

    pub(crate) fn allowed_blocks(&self) -> impl Iterator<Item = (Vec<u8>, f64)> + '_ {
        self.allowed
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| (block_of(i, self.k, self.range), self.table[i]))
    }

    /// max |f| over allowed blocks.
    pub fn sup_norm(&self) -> f64 {
        self.allowed_blocks().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_value(&self) -> f64 {
        self.allowed_blocks().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.allowed_blocks().map(|(_, v)| v).fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|v| *v == 0.0)
    }

    /// f + c.
    pub fn shifted(&self, c: f64) -> Self {
        let table = self
            .table
            .iter()
            .zip(&self.allowed)
            .map(|(v, a)| if *a { v + c } else { 0.0 })
            .collect();
        BlockPotential { table, ..self.clone() }
    }

    /// Sum of two potentials, lifted to the larger range.
    pub fn add(&self, other: &BlockPotential, sys: &Subshift) -> Result<Self> {
        let r = self.range.max(other.range);
        let size = self.k.pow(r as u32);
        let table = (0..size)
            .map(|i| {
                let b = block_of(i, self.k, r);
                if sys.is_allowed(&b) {
                    self.value(&b[..self.range]) + other.value(&b[..other.range])
                } else {
                    0.0
                }
            })
            .collect();
        Self::new(sys, r, table)
    }

    /// Relabels symbols: the new potential g satisfies g(perm(w)) = f(w).
    pub fn permuted(&self, perm: &[u8], sys_new: &Subshift) -> Result<Self> {
        let size = self.table.len();
        let mut table = vec![0.0; size];
        for (i, v) in self.table.iter().enumerate() {
            let b: Vec<u8> = block_of(i, self.k, self.range).iter().map(|&s| perm[s as usize]).collect();
            table[index_of(&b, self.k)] = *v;
        }
        Self::new(sys_new, self.range, table)
    }

    /// f_n on the cylinder [w]; requires |w| ≥ n + r − 1.
    pub fn birkhoff_sum(&self, w: &[u8], n: usize) -> Result<f64> {
        if w.len() + 1 < n + self.range {
            return Err(Error::InsufficientPrecision(format!(
                "birkhoff sum of order {n} needs {} symbols, word has {}",
                n + self.range - 1,
                w.len()
            )));
        }
        let mut acc = CompensatedSum::new();
        for i in 0..n {
            acc.add(self.value(&w[i..i + self.range]));
        }
        Ok(acc.value())
    }

    /// Largest |f(u) − f(v)| over allowed blocks agreeing on their first min(r, m) symbols.
    pub fn variation(&self, res: Resolution) -> f64 {
        let agree = self.range.min(res.m());
        if agree >= self.range {
            return 0.0;
        }
        let blocks: Vec<(Vec<u8>, f64)> = self.allowed_blocks().collect();
        let mut best = 0.0f64;
        for (i, (u, fu)) in blocks.iter().enumerate() {
            for (v, fv) in &blocks[i + 1..] {
                if u[..agree] == v[..agree] {
                    best = best.max((fu - fv).abs());
                }
            }
        }
        best
    }
}

pub(crate) fn index_of(block: &[u8], k: usize) -> usize {
    block.iter().fold(0usize, |acc, &b| acc * k + b as usize)
}

pub(crate) fn block_of(mut idx: usize, k: usize, len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    for slot in out.iter_mut().rev() {
        *slot = (idx % k) as u8;
        idx /= k;
    }
    out
}

/// Birkhoff sum f_n on the cylinder of `w`.
pub fn birkhoff_sum(f: &BlockPotential, w: &Word, n: usize) -> Result<f64> {
    f.birkhoff_sum(w.symbols(), n)
}

/// γ(ε): the oscillation of f over pairs of points that agree to the resolution.
pub fn f_variation(f: &BlockPotential, res: Resolution) -> f64 {
    f.variation(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full2() -> Subshift {
        Subshift::full(2).unwrap()
    }

    #[test]
    fn hand_sum() {
        let f = BlockPotential::from_symbols(&full2(), &[0.0, 1.0]).unwrap();
        let w = Word::parse("0110").unwrap();
        assert_eq!(birkhoff_sum(&f, &w, 4).unwrap(), 2.0);
        let z = BlockPotential::zero(&full2());
        assert_eq!(birkhoff_sum(&z, &Word::parse("0101010").unwrap(), 7).unwrap(), 0.0);
    }

    #[test]
    fn range_two_needs_extra_symbol() {
        let f = BlockPotential::new(&full2(), 2, vec![0.0, 1.0, 0.5, 0.0]).unwrap();
        let w = Word::parse("011").unwrap();
        assert!(birkhoff_sum(&f, &w, 3).is_err());
        assert_eq!(birkhoff_sum(&f, &w, 2).unwrap(), 1.0);
    }

    #[test]
    fn variation_examples() {
        let f = BlockPotential::new(&full2(), 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f_variation(&f, Resolution::new(1).unwrap()), 1.0);
        assert_eq!(f_variation(&f, Resolution::new(2).unwrap()), 0.0);
        let g = BlockPotential::from_symbols(&full2(), &[0.0, 3.0]).unwrap();
        assert_eq!(f_variation(&g, Resolution::new(1).unwrap()), 0.0);
    }

    #[test]
    fn forbidden_entries_ignored() {
        let g = Subshift::golden_mean();
        let f = BlockPotential::new(&g, 2, vec![0.0, 1.0, 2.0, 99.0]).unwrap();
        assert_eq!(f.max_value(), 2.0);
        assert_eq!(f.sup_norm(), 2.0);
    }
}

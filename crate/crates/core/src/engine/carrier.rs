//! Typical carriers of a Markov measure: points whose prefixes w all satisfy
//! −log μ[w] + f_{|w|−m}(w) ≤ |w|·(h + ∫f) + scale·√|w| down to the computed
//! depth. A wide enough band carries mass 1 − δ, and the set sums of the
//! carrier run over the class tree with dead branches removed.

use super::classes::{Band, ClassTree};
use crate::error::{precondition, Result};
use crate::measures::MarkovMeasure;
use crate::symbolic::{BlockPotential, Resolution};

const SCALE_STEPS: usize = 14;

pub(crate) struct Carrier {
    pub tree: ClassTree,
    /// alive[len][i]: class i at length len has descendants at the full depth.
    alive: Vec<Vec<bool>>,
    pub band: Band,
}

impl Carrier {
    pub fn with_band(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, depth: usize, band: Band, prefix: &[u8]) -> Result<Self> {
        let tree = ClassTree::build_from(mu, f, res, depth, Some(band), prefix)?;
        let mut alive: Vec<Vec<bool>> = tree.levels.iter().map(|l| vec![false; l.len()]).collect();
        alive[depth].iter_mut().for_each(|a| *a = true);
        for len in (1..depth).rev() {
            let (upper, lower) = alive.split_at_mut(len + 1);
            for (i, c) in tree.levels[len].iter().enumerate() {
                upper[len][i] = c.children.iter().any(|&j| lower[0][j as usize]);
            }
        }
        Ok(Carrier { tree, alive, band })
    }

    /// Narrowest band (to a few percent of its scale) whose carrier keeps mass ≥ 1 − δ at `depth`.
    pub fn typical(mu: &MarkovMeasure, f: &BlockPotential, res: Resolution, depth: usize, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return precondition(format!("delta must lie in (0, 1), got {delta}"));
        }
        let center = mu.free_energy(f);
        let band = |scale| Band { center, scale };
        let target = 1.0 - delta;
        let mut hi = Self::with_band(mu, f, res, depth, band(0.0), &[])?;
        if hi.mass() >= target {
            return Ok(hi);
        }
        let mut lo_scale = 0.0;
        let mut hi_scale = 0.25;
        loop {
            hi = Self::with_band(mu, f, res, depth, band(hi_scale), &[])?;
            if hi.mass() >= target {
                break;
            }
            lo_scale = hi_scale;
            hi_scale *= 2.0;
            if hi_scale > 1e3 {
                return precondition("no band reaches the requested carrier mass");
            }
        }
        for _ in 0..SCALE_STEPS {
            let mid = 0.5 * (lo_scale + hi_scale);
            let c = Self::with_band(mu, f, res, depth, band(mid), &[])?;
            if c.mass() >= target {
                hi_scale = mid;
                hi = c;
            } else {
                lo_scale = mid;
            }
        }
        Ok(hi)
    }

    pub fn depth(&self) -> usize {
        self.tree.depth()
    }

    /// μ of the carrier as resolved at the full depth.
    pub fn mass(&self) -> f64 {
        self.tree.mass(self.depth())
    }

    pub fn is_empty(&self) -> bool {
        self.alive.iter().skip(1).all(|l| !l.iter().any(|&a| a))
    }

    /// log of Σ e^{f_n} over carrier cylinders of length n + m.
    pub fn log_capacity(&self, n: usize) -> f64 {
        let len = n + self.tree.m;
        let s: f64 = self.tree.levels[len]
            .iter()
            .zip(&self.alive[len])
            .filter(|(_, &a)| a)
            .map(|(c, _)| c.count * c.w_open)
            .sum();
        n as f64 * self.tree.top + s.ln()
    }

    /// Optimal cover sum by open balls of orders n..=depth − m.
    pub fn cover(&self, n: usize, alpha: f64, depth: usize) -> f64 {
        let m = self.tree.m;
        let top = self.tree.top;
        self.reduce(n, depth, |len| (-(alpha - top) * (len - m) as f64).exp(), |c| c.w_open, |own, kids, leaf| if leaf { own } else { own.min(kids) })
    }

    /// Optimal packing sum by closed balls of orders n..=depth − m + 1.
    pub fn packing(&self, n: usize, alpha: f64, depth: usize) -> f64 {
        let m = self.tree.m;
        let top = self.tree.top;
        self.reduce(n, depth, |len| (-(alpha - top) * (len + 1 - m) as f64).exp(), |c| c.w_closed, |own, kids, leaf| if leaf { own } else { own.max(kids) })
    }

    fn reduce(
        &self,
        n: usize,
        depth: usize,
        level_scale: impl Fn(usize) -> f64,
        weight: impl Fn(&super::classes::Class) -> f64,
        pick: impl Fn(f64, f64, bool) -> f64,
    ) -> f64 {
        let l0 = n + self.tree.m;
        let depth = depth.min(self.depth());
        let mut below: Vec<f64> = Vec::new();
        for len in (l0..=depth).rev() {
            let scale = level_scale(len);
            let level = &self.tree.levels[len];
            below = level
                .iter()
                .zip(&self.alive[len])
                .map(|(c, &alive)| {
                    if !alive {
                        return 0.0;
                    }
                    let leaf = len == depth;
                    let kids: f64 = if leaf { 0.0 } else { c.children.iter().map(|&j| below[j as usize]).sum() };
                    pick(scale * weight(c), kids, leaf)
                })
                .collect();
        }
        self.tree.levels[l0].iter().zip(&below).map(|(c, v)| c.count * v).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::Subshift;

    #[test]
    fn uniform_carrier_is_everything() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.5, 0.5]).unwrap();
        let f = BlockPotential::zero(&sys);
        let c = Carrier::typical(&mu, &f, Resolution::new(1).unwrap(), 12, 0.1).unwrap();
        assert!((c.mass() - 1.0).abs() < 1e-12);
        assert!((c.log_capacity(5) - 6.0 * 2f64.ln()).abs() < 1e-12);
        // every cover of the full shift by balls of order 5 costs 2^6 e^{-5α}
        let a = 0.3;
        assert!((c.cover(5, a, 5 + 1) - 64.0 * (-5.0 * a).exp()).abs() < 1e-9);
    }

    #[test]
    fn carrier_mass_reaches_target() {
        let sys = Subshift::full(2).unwrap();
        let mu = MarkovMeasure::bernoulli(&[0.3, 0.7]).unwrap();
        let f = BlockPotential::from_symbols(&sys, &[0.0, 1.0]).unwrap();
        let c = Carrier::typical(&mu, &f, Resolution::new(1).unwrap(), 20, 0.25).unwrap();
        assert!(c.mass() >= 0.75 && c.mass() < 1.0);
    }
}

//! Independent ground truth: transfer-matrix pressure, brute-force word sums
//! and exact binomial type counts.

mod enumerate;
mod instances;

pub use enumerate::{brute_force_cover_sum, brute_force_fixed_order_sum, brute_force_packing_sum};
pub use instances::{property_instance, random_markov, random_symbol_potential, small_instance, small_rational_measure, PropertyInstance, SmallInstance};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::numeric::log_sum_exp;
use crate::symbolic::{block_of, BlockPotential, Subshift};

/// A weighted directed graph on `n` vertices with edge weights given in log form.
#[derive(Clone, Debug, Default)]
pub(crate) struct LogGraph {
    pub n: usize,
    pub edges: Vec<Vec<(usize, f64)>>,
}

impl LogGraph {
    pub fn new(n: usize) -> Self {
        LogGraph { n, edges: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, from: usize, to: usize, log_w: f64) {
        self.edges[from].push((to, log_w));
    }

    /// Strongly connected components that carry a cycle.
    pub fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, 0);
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for (a, es) in self.edges.iter().enumerate() {
            for (b, _) in es {
                g.add_edge(nodes[a], nodes[*b], ());
            }
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                v.sort_unstable();
                v
            })
            .filter(|c| c.len() > 1 || self.edges[c[0]].iter().any(|(t, _)| *t == c[0]))
            .collect();
        comps.sort();
        comps
    }

    /// Collatz–Wielandt bracket for log ρ of the subgraph on `comp`.
    pub fn component_bracket(&self, comp: &[usize], max_iter: usize, width: f64) -> (f64, f64) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in comp.iter().enumerate() {
            local[v] = i;
        }
        let sub: Vec<Vec<(usize, f64)>> = comp
            .iter()
            .map(|&v| self.edges[v].iter().filter(|(t, _)| local[*t] != usize::MAX).map(|(t, w)| (local[*t], *w)).collect())
            .collect();
        log_perron_bracket(&sub, max_iter, width)
    }
}

/// Power iteration on A + cI in the log domain with Collatz–Wielandt bounds
/// min_i (Av)_i / v_i ≤ ρ(A) ≤ max_i (Av)_i / v_i. Returns (log lo, log hi).
pub(crate) fn log_perron_bracket(adj: &[Vec<(usize, f64)>], max_iter: usize, width: f64) -> (f64, f64) {
    let n = adj.len();
    let shift_log = adj
        .iter()
        .map(|es| log_sum_exp(es.iter().map(|(_, w)| *w)))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut v = vec![0.0f64; n];
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for it in 0..max_iter {
        let av: Vec<f64> = (0..n).map(|i| log_sum_exp(adj[i].iter().map(|(t, w)| w + v[*t]))).collect();
        let ratios = av.iter().zip(&v).map(|(a, b)| a - b);
        let lo = ratios.clone().fold(f64::INFINITY, f64::min);
        let hi = ratios.fold(f64::NEG_INFINITY, f64::max);
        best = (best.0.max(lo), best.1.min(hi));
        if best.1 - best.0 <= width {
            break;
        }
        // v ← (A + cI) v, normalized
        let next: Vec<f64> = (0..n).map(|i| crate::numeric::log_add(av[i], shift_log + v[i])).collect();
        let top = next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        v = next.into_iter().map(|x| x - top).collect();
        if it + 1 == max_iter {
            break;
        }
    }
    best
}

/// Result of [`transfer_pressure`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferPressure {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// The block graph was reducible; the value is the largest component pressure.
    pub reducible: bool,
}

/// Weighted block graph of order max(r−1, 1): vertices are allowed blocks,
/// edges carry e^{f} of the r-block they spell.
pub(crate) fn block_graph(sys: &Subshift, f: &BlockPotential) -> (Vec<Vec<u8>>, LogGraph) {
    let k = sys.alphabet_size();
    let q = f.range().saturating_sub(1).max(1);
    let blocks: Vec<Vec<u8>> = (0..k.pow(q as u32)).map(|i| block_of(i, k, q)).filter(|b| sys.is_allowed(b)).collect();
    let index: std::collections::HashMap<&[u8], usize> = blocks.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let mut g = LogGraph::new(blocks.len());
    for (i, u) in blocks.iter().enumerate() {
        for c in sys.successors(*u.last().unwrap()) {
            let mut ext = u.clone();
            ext.push(c);
            let w = if f.range() == 1 { f.value(&u[..1]) } else { f.value(&ext) };
            let j = index[&ext[1..]];
            g.add_edge(i, j, w);
        }
    }
    (blocks, g)
}

/// Classical pressure log ρ of the weighted block matrix, with a certified bracket.
pub fn transfer_pressure(sys: &Subshift, f: &BlockPotential) -> Result<TransferPressure> {
    if f.alphabet_size() != sys.alphabet_size() {
        return precondition("potential and subshift alphabets differ");
    }
    let (_, g) = block_graph(sys, f);
    let comps = g.cyclic_components();
    let reducible = comps.len() != 1 || comps[0].len() != g.n;
    let mut best = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in &comps {
        let (lo, hi) = g.component_bracket(c, 1_000_000, 1e-11);
        if hi - lo > 1e-10 {
            return Err(Error::Invariant(format!("transfer bracket did not close: [{lo}, {hi}]")));
        }
        if lo > best.0 {
            best = (lo, hi);
        }
    }
    Ok(TransferPressure { value: 0.5 * (best.0 + best.1), lo: best.0, hi: best.1, reducible })
}

/// Result of [`brute_force_pressure`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BruteForcePressure {
    /// (1/n) log Σ over allowed words of e^{f_n}.
    pub estimate: f64,
    /// (1/n) log of the smallest / largest row sum of the n-th power of the block matrix.
    pub lower: f64,
    pub upper: f64,
}

/// Largest n accepted by [`brute_force_pressure`] on a k-symbol alphabet.
pub fn brute_force_cap(k: usize) -> usize {
    ((22.0 * 2f64.ln()) / (k as f64).ln()).floor() as usize
}

/// Word-enumeration pressure at length n with Collatz–Wielandt bounds.
pub fn brute_force_pressure(sys: &Subshift, f: &BlockPotential, n: usize) -> Result<BruteForcePressure> {
    let k = sys.alphabet_size();
    if n == 0 {
        return precondition("n must be at least 1");
    }
    if n > brute_force_cap(k) {
        return Err(Error::Budget(format!("n = {n} exceeds the enumeration cap {}", brute_force_cap(k))));
    }
    let r = f.range();
    let q = r.saturating_sub(1).max(1);
    // total over words of length n + r − 1
    let total = log_sum_exp(sys.words_of_length(n + r - 1).iter().map(|w| f.birkhoff_sum(w.symbols(), n).unwrap()));
    // row sums: paths of n edges from each q-block, i.e. words of length n + q
    let mut rows: std::collections::BTreeMap<Vec<u8>, Vec<f64>> = std::collections::BTreeMap::new();
    for w in sys.words_of_length(n + q) {
        let s = w.symbols();
        rows.entry(s[..q].to_vec()).or_default().push(f.birkhoff_sum(s, n).unwrap());
    }
    let sums: Vec<f64> = rows.into_values().map(log_sum_exp).collect();
    let nf = n as f64;
    Ok(BruteForcePressure {
        estimate: total / nf,
        lower: sums.iter().cloned().fold(f64::INFINITY, f64::min) / nf,
        upper: sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / nf,
    })
}

/// Binomial coefficients C(n, 0..=n).
pub fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for j in 0..n {
        let next = &row[j] * BigUint::from(n - j) / BigUint::from(j + 1);
        row.push(next);
    }
    row
}

/// Number of binary words of length n whose frequency of the symbol 1 is within η of p.
pub fn type_count(p: &BigRational, n: usize, eta: f64) -> Result<BigUint> {
    if n == 0 {
        return precondition("n must be at least 1");
    }
    let eta = BigRational::from_float(eta).ok_or_else(|| Error::Input("tolerance must be finite".into()))?;
    if eta < BigRational::zero() {
        return precondition("tolerance must be nonnegative");
    }
    let nn = BigRational::from_integer(n.into());
    let row = binomial_row(n);
    let mut total = BigUint::zero();
    for (j, c) in row.iter().enumerate() {
        let freq = BigRational::from_integer(j.into()) / &nn;
        let diff = if freq > *p { &freq - p } else { p - &freq };
        if diff <= eta {
            total += c;
        }
    }
    Ok(total)
}

/// Natural-log binary entropy.
pub fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::rational_from_decimal;

    fn full2() -> Subshift {
        Subshift::full(2).unwrap()
    }

    #[test]
    fn transfer_examples() {
        let x = full2();
        let t = transfer_pressure(&x, &BlockPotential::zero(&x)).unwrap();
        assert!((t.value - 2f64.ln()).abs() < 1e-10);
        assert!(t.hi - t.lo <= 1e-10);
        let g = Subshift::golden_mean();
        let t = transfer_pressure(&g, &BlockPotential::zero(&g)).unwrap();
        assert!((t.value - 0.4812118250596034).abs() < 1e-10);
        assert!(!t.reducible);
        let f = BlockPotential::from_symbols(&x, &[0.0, 2f64.ln()]).unwrap();
        assert!((transfer_pressure(&x, &f).unwrap().value - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn periodic_graph_converges() {
        let c = Subshift::new(&[vec![0, 1], vec![1, 0]]).unwrap();
        let t = transfer_pressure(&c, &BlockPotential::zero(&c)).unwrap();
        assert!(t.value.abs() < 1e-10);
    }

    #[test]
    fn reducible_takes_max() {
        let s = Subshift::new(&[vec![1, 1, 0], vec![1, 1, 1], vec![0, 0, 1]]).unwrap();
        let t = transfer_pressure(&s, &BlockPotential::zero(&s)).unwrap();
        assert!(t.reducible);
        assert!((t.value - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn brute_force_examples() {
        let x = full2();
        let b = brute_force_pressure(&x, &BlockPotential::zero(&x), 10).unwrap();
        assert!((b.estimate - 2f64.ln()).abs() < 1e-14);
        let g = Subshift::golden_mean();
        let b = brute_force_pressure(&g, &BlockPotential::zero(&g), 10).unwrap();
        let lphi = 0.4812118250596034;
        assert!((b.estimate - lphi).abs() < 0.07);
        assert!(b.lower <= lphi && lphi <= b.upper);
        assert!(brute_force_pressure(&x, &BlockPotential::zero(&x), 23).is_err());
    }

    #[test]
    fn type_count_examples() {
        let half = rational_from_decimal("1/2").unwrap();
        assert_eq!(type_count(&half, 4, 0.0).unwrap(), BigUint::from(6u32));
        assert_eq!(type_count(&half, 9, 0.5).unwrap(), BigUint::from(512u32));
        assert_eq!(type_count(&BigRational::zero(), 7, 0.0).unwrap(), BigUint::one());
    }
}

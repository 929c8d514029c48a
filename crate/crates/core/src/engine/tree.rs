use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::numeric::{log_add, log_sum_exp};
use crate::oracles::LogGraph;
use crate::symbolic::{BlockPotential, Resolution, Subshift, SymbolicSet};

/// Which Bowen ball a cylinder stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BallMode {
    /// B_n(x, 2^-m): cylinders of length n + m, centers anywhere in X.
    Open,
    /// B̄_n(x, 2^-m): cylinders of length n + m − 1, centers in Z.
    Closed,
}

pub(crate) type Key = (u64, Vec<u8>);

/// The word tree of Z at one resolution, with the f-part of the ball weights.
///
/// A node's weight exponent is f_n at the center: for open balls the cheapest
/// center in X (covers take an infimum), for closed balls the best center in Z
/// (packings take a supremum). Once a word is at least `key_len` long its
/// subtree and weight increments depend only on its key.
pub(crate) struct TreeModel<'a> {
    pub z: &'a SymbolicSet,
    pub sys: &'a Subshift,
    pub f: &'a BlockPotential,
    pub m: usize,
    pub mode: BallMode,
    pub suffix_len: usize,
    pub key_len: usize,
}

impl<'a> TreeModel<'a> {
    pub fn new(z: &'a SymbolicSet, f: &'a BlockPotential, res: Resolution, mode: BallMode) -> Self {
        let m = res.m();
        let suffix_len = z.max_window().max(m + 1).max(f.range()).max(1);
        let key_len = z.key_threshold().max(suffix_len);
        TreeModel { z, sys: z.subshift(), f, m, mode, suffix_len, key_len }
    }

    /// Word length of a ball of order n.
    pub fn len_of_order(&self, n: usize) -> usize {
        match self.mode {
            BallMode::Open => n + self.m,
            BallMode::Closed => n + self.m - 1,
        }
    }

    pub fn order_of_len(&self, len: usize) -> usize {
        match self.mode {
            BallMode::Open => len - self.m,
            BallMode::Closed => len + 1 - self.m,
        }
    }

    pub fn nonempty(&self, w: &[u8]) -> bool {
        !self.z.classify_symbols(w).is_empty()
    }

    pub fn children(&self, w: &[u8]) -> Vec<Vec<u8>> {
        self.sys
            .next_symbols(w)
            .into_iter()
            .map(|b| {
                let mut c = w.to_vec();
                c.push(b);
                c
            })
            .filter(|c| self.nonempty(c))
            .collect()
    }

    /// Nonempty words of a given length, lexicographic.
    pub fn level_words(&self, len: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut stack = vec![Vec::new()];
        while let Some(w) = stack.pop() {
            if w.len() == len {
                out.push(w);
                continue;
            }
            let mut kids = self.children(&w);
            kids.reverse();
            stack.extend(kids);
        }
        out
    }

    /// f-part of the weight of the ball spelled by `w`.
    pub fn log_weight(&self, w: &[u8]) -> f64 {
        let n = self.order_of_len(w.len());
        let need = n + self.f.range() - 1;
        self.opt_extension(&mut w.to_vec(), n, need).unwrap_or(match self.mode {
            BallMode::Open => f64::INFINITY,
            BallMode::Closed => f64::NEG_INFINITY,
        })
    }

    fn opt_extension(&self, buf: &mut Vec<u8>, n: usize, need: usize) -> Option<f64> {
        if buf.len() >= need {
            return Some(self.f.birkhoff_sum(buf, n).expect("length checked"));
        }
        let mut best: Option<f64> = None;
        for b in self.sys.next_symbols(buf) {
            buf.push(b);
            let ok = match self.mode {
                BallMode::Open => true,
                BallMode::Closed => self.nonempty(buf),
            };
            if ok {
                if let Some(v) = self.opt_extension(buf, n, need) {
                    best = Some(match (best, self.mode) {
                        (None, _) => v,
                        (Some(x), BallMode::Open) => x.min(v),
                        (Some(x), BallMode::Closed) => x.max(v),
                    });
                }
            }
            buf.pop();
        }
        best
    }

    pub fn key(&self, w: &[u8]) -> Key {
        (self.z.alive_mask(w), w[w.len() - self.suffix_len..].to_vec())
    }
}

/// The finite graph of node keys reachable below `key_len`, with edge weights
/// equal to the f-part increment of the ball weight.
pub(crate) struct KeyGraph {
    pub keys: Vec<Key>,
    index: HashMap<Key, usize>,
    pub graph: LogGraph,
    /// Seeds at length `key_len`: (key index, f-part of the weight).
    pub seeds: Vec<(usize, f64)>,
    pub key_len: usize,
}

impl KeyGraph {
    pub fn build(model: &TreeModel) -> Self {
        let mut keys: Vec<Key> = Vec::new();
        let mut reps: Vec<Vec<u8>> = Vec::new();
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut seeds = Vec::new();
        let intern = |w: Vec<u8>, keys: &mut Vec<Key>, reps: &mut Vec<Vec<u8>>, index: &mut HashMap<Key, usize>| {
            let k = model.key(&w);
            if let Some(&i) = index.get(&k) {
                return i;
            }
            let i = keys.len();
            index.insert(k.clone(), i);
            keys.push(k);
            reps.push(w);
            i
        };
        for w in model.level_words(model.key_len) {
            let lw = model.log_weight(&w);
            let i = intern(w, &mut keys, &mut reps, &mut index);
            seeds.push((i, lw));
        }
        let mut edges: Vec<Vec<(usize, f64)>> = Vec::new();
        let mut next = 0;
        while next < keys.len() {
            let rep = reps[next].clone();
            let base = model.log_weight(&rep);
            let mut es = Vec::new();
            for c in model.children(&rep) {
                let d = model.log_weight(&c) - base;
                let j = intern(c, &mut keys, &mut reps, &mut index);
                es.push((j, d));
            }
            edges.push(es);
            next += 1;
        }
        let mut graph = LogGraph::new(keys.len());
        for (i, es) in edges.into_iter().enumerate() {
            for (j, d) in es {
                graph.add_edge(i, j, d);
            }
        }
        KeyGraph { keys, index, graph, seeds, key_len: model.key_len }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn index_of(&self, key: &Key) -> usize {
        self.index[key]
    }

    /// log Σ e^{f-part} over nonempty words of each length from `key_len` to `max_len`,
    /// aggregated per key.
    pub fn forward_masses(&self, max_len: usize) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut cur = vec![f64::NEG_INFINITY; n];
        for &(i, lw) in &self.seeds {
            cur[i] = log_add(cur[i], lw);
        }
        let mut out = vec![cur.clone()];
        for _ in self.key_len..max_len {
            let mut nxt = vec![f64::NEG_INFINITY; n];
            for (s, es) in self.graph.edges.iter().enumerate() {
                if cur[s] == f64::NEG_INFINITY {
                    continue;
                }
                for (t, d) in es {
                    nxt[*t] = log_add(nxt[*t], cur[s] + d);
                }
            }
            cur = nxt;
            out.push(cur.clone());
        }
        out
    }

    /// Normalized cover costs: g_d(s) = min(1, Σ e^{−α+Δ} g_{d−1}(t)), g_0 = 1, in log form.
    pub fn cover_table(&self, alpha: f64, depth: usize) -> Vec<Vec<f64>> {
        self.table(alpha, depth, |own, kids| own.min(kids))
    }

    /// Normalized packing values: p_d(s) = max(1, Σ e^{−α+Δ} p_{d−1}(t)), in log form.
    pub fn packing_table(&self, alpha: f64, depth: usize) -> Vec<Vec<f64>> {
        self.table(alpha, depth, |own, kids| own.max(kids))
    }

    fn table(&self, alpha: f64, depth: usize, pick: impl Fn(f64, f64) -> f64) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out = vec![vec![0.0f64; n]];
        for d in 1..=depth {
            let prev = &out[d - 1];
            let row: Vec<f64> = (0..n)
                .map(|s| {
                    let kids = log_sum_exp(self.graph.edges[s].iter().map(|(t, w)| w - alpha + prev[*t]));
                    pick(0.0, kids)
                })
                .collect();
            out.push(row);
        }
        out
    }
}

/// Log of the normalized recursion value of `w` with `remaining` further levels.
pub(crate) fn node_value(
    model: &TreeModel,
    graph: &KeyGraph,
    table: &[Vec<f64>],
    w: &mut Vec<u8>,
    remaining: usize,
    alpha: f64,
    covering: bool,
) -> f64 {
    if remaining == 0 {
        return 0.0;
    }
    if w.len() >= graph.key_len {
        return table[remaining][graph.index_of(&model.key(w))];
    }
    let base = model.log_weight(w);
    let mut terms = Vec::new();
    for b in model.sys.next_symbols(w) {
        w.push(b);
        if model.nonempty(w) {
            let d = model.log_weight(w) - base;
            terms.push(d - alpha + node_value(model, graph, table, w, remaining - 1, alpha, covering));
        }
        w.pop();
    }
    let kids = log_sum_exp(terms);
    if covering {
        kids.min(0.0)
    } else {
        kids.max(0.0)
    }
}

//! Finite certificates for the critical values of the key graph of a set.
//!
//! Below the spectral radius of a cyclic component the sums blow up (mass
//! distribution for covers, growing antichains for packings). Above it a
//! positive test vector u with e^{-α} (A u)_s < u_s on every key gives a
//! self-similar cover whose sum shrinks with n.

use super::tree::KeyGraph;
use crate::numeric::log_sum_exp;

pub(crate) const BRACKET_ITERS: usize = 50_000;
pub(crate) const BRACKET_WIDTH: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct ComponentBracket {
    pub lo: f64,
    pub hi: f64,
}

pub(crate) fn component_brackets(graph: &KeyGraph) -> Vec<ComponentBracket> {
    graph
        .graph
        .cyclic_components()
        .iter()
        .map(|c| {
            let (lo, hi) = graph.graph.component_bracket(c, BRACKET_ITERS, BRACKET_WIDTH);
            ComponentBracket { lo, hi }
        })
        .collect()
}

/// log of a positive vector close to a Perron vector of the whole graph.
fn test_vector(graph: &KeyGraph) -> Vec<f64> {
    let adj = &graph.graph.edges;
    let n = adj.len();
    let mut v = vec![0.0f64; n];
    // resolvent-style smoothing keeps every entry finite on reducible graphs
    for _ in 0..2_000 {
        let av: Vec<f64> = (0..n).map(|i| log_sum_exp(adj[i].iter().map(|(t, w)| w + v[*t]))).collect();
        let top = av.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let next: Vec<f64> = (0..n).map(|i| crate::numeric::log_add(av[i] - top, v[i] - 1e-3)).collect();
        let m = next.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let next: Vec<f64> = next.into_iter().map(|x| x - m).collect();
        let delta = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if delta < 1e-13 {
            break;
        }
    }
    v
}

/// Is α certified above the cover critical value at `depth` levels?
///
/// φ_0 = 1, φ_d(s) = min(1, Σ_t e^{Δ(s,t) − α} u_t/u_s φ_{d−1}(t)); if
/// max_s φ_depth(s) < 1 then replacing each node by its optimal subtree cover
/// shrinks every cover by a fixed factor, so the limit sum is 0.
fn cover_certified(graph: &KeyGraph, u: &[f64], alpha: f64, depth: usize) -> bool {
    let adj = &graph.graph.edges;
    let n = adj.len();
    let mut phi = vec![0.0f64; n];
    for _ in 0..depth {
        phi = (0..n)
            .map(|s| log_sum_exp(adj[s].iter().map(|(t, w)| w - alpha + u[*t] - u[s] + phi[*t])).min(0.0))
            .collect();
    }
    phi.iter().all(|&p| p < -1e-12)
}

/// Smallest α (to `tol`) in [lo, hi] certified above the cover critical value.
pub(crate) fn cover_above(graph: &KeyGraph, depth: usize, lo: f64, hi: f64, tol: f64) -> f64 {
    let u = test_vector(graph);
    let mut hi = hi;
    let mut step = 1.0;
    while !cover_certified(graph, &u, hi, depth) {
        hi += step;
        step *= 2.0;
    }
    let mut lo = lo.min(hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if cover_certified(graph, &u, mid, depth) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

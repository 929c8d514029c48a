//! Exhaustive enumeration of covers and disjoint families on small word trees.
//!
//! Nothing here shares code with the engine: membership in Z is decided by
//! searching for a long admissible extension, and every cover or antichain
//! below a root is listed explicitly.

use crate::error::{precondition, Error, Result};
use crate::symbolic::{BlockPotential, Piece, Resolution, SetDescription, SymbolicSet};

/// Extension length that decides whether a cylinder meets Z for the small
/// forbidden words used in tests.
const LOOKAHEAD: usize = 12;

/// Covers or antichains per root beyond this are refused.
const FAMILY_CAP: usize = 2_000_000;

fn fits(sys_ok: &dyn Fn(&[u8]) -> bool, piece: &Piece, w: &[u8]) -> bool {
    if !sys_ok(w) {
        return false;
    }
    let prefix_ok = piece.prefixes.is_empty()
        || piece.prefixes.iter().any(|p| {
            let p = p.symbols();
            if p.len() <= w.len() {
                w.starts_with(p)
            } else {
                p.starts_with(w)
            }
        });
    prefix_ok && !piece.forbidden.iter().any(|f| w.windows(f.len()).any(|win| win == f.symbols()))
}

/// Whether the cylinder [w] meets Z, by depth-first search for an admissible
/// word LOOKAHEAD symbols longer than w (and than every prefix).
pub(crate) fn meets(z: &SymbolicSet, w: &[u8]) -> bool {
    let sys = z.subshift();
    let pieces: Vec<Piece> = match z.description() {
        SetDescription::Empty => return false,
        SetDescription::Whole => vec![Piece::default()],
        SetDescription::Union(p) => p.clone(),
    };
    let ok = |v: &[u8]| sys.is_allowed(v);
    pieces.iter().any(|piece| {
        let longest = piece.prefixes.iter().map(|p| p.len()).max().unwrap_or(0);
        let target = w.len().max(longest) + LOOKAHEAD;
        let mut buf = w.to_vec();
        extend(&ok, piece, &mut buf, target, sys.alphabet_size())
    })
}

fn extend(ok: &dyn Fn(&[u8]) -> bool, piece: &Piece, buf: &mut Vec<u8>, target: usize, k: usize) -> bool {
    if !fits(ok, piece, buf) {
        return false;
    }
    if buf.len() >= target {
        return true;
    }
    for b in 0..k as u8 {
        buf.push(b);
        let found = extend(ok, piece, buf, target, k);
        buf.pop();
        if found {
            return true;
        }
    }
    false
}

/// f_n at the best center of [w]: cheapest in X for covers, dearest in Z for packings.
fn center_weight(z: &SymbolicSet, f: &BlockPotential, w: &[u8], n: usize, covering: bool) -> Option<f64> {
    let need = n + f.range() - 1;
    let sys = z.subshift();
    let mut best: Option<f64> = None;
    let mut stack = vec![w.to_vec()];
    while let Some(u) = stack.pop() {
        if !sys.is_allowed(&u) || (!covering && !meets(z, &u)) {
            continue;
        }
        if u.len() >= need {
            let v = f.birkhoff_sum(&u, n).expect("long enough");
            best = Some(match best {
                None => v,
                Some(b) if covering => b.min(v),
                Some(b) => b.max(v),
            });
            continue;
        }
        for b in 0..sys.alphabet_size() as u8 {
            let mut c = u.clone();
            c.push(b);
            stack.push(c);
        }
    }
    best
}

fn words_meeting(z: &SymbolicSet, len: usize) -> Vec<Vec<u8>> {
    let k = z.subshift().alphabet_size() as u8;
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..k).map(move |b| {
                    let mut c = w.clone();
                    c.push(b);
                    c
                })
            })
            .filter(|c| meets(z, c))
            .collect();
    }
    out
}

/// Every family of cylinders below `w` (inclusive) down to length `cap`:
/// covers of [w] ∩ Z when `covering`, disjoint families otherwise.
fn families(z: &SymbolicSet, w: &[u8], cap: usize, covering: bool) -> Result<Vec<Vec<Vec<u8>>>> {
    let mut out = vec![vec![w.to_vec()]];
    if !covering {
        out.push(Vec::new());
    }
    if w.len() >= cap {
        return Ok(out);
    }
    let k = z.subshift().alphabet_size() as u8;
    let mut combos: Vec<Vec<Vec<u8>>> = vec![Vec::new()];
    let mut any = false;
    for b in 0..k {
        let mut c = w.to_vec();
        c.push(b);
        if !meets(z, &c) {
            continue;
        }
        any = true;
        let below = families(z, &c, cap, covering)?;
        if combos.len().saturating_mul(below.len()) > FAMILY_CAP {
            return Err(Error::Budget("too many families for exhaustive enumeration".into()));
        }
        combos = combos
            .iter()
            .flat_map(|a| {
                below.iter().map(move |f| {
                    let mut v = a.clone();
                    v.extend(f.iter().cloned());
                    v
                })
            })
            .collect();
    }
    if any {
        // the all-empty combination repeats the empty family already listed
        out.extend(combos.into_iter().filter(|c| !c.is_empty()));
    }
    Ok(out)
}

fn exhaustive(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential, cap: usize, covering: bool) -> Result<f64> {
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    let m = res.m();
    let root = if covering { n + m } else { n + m - 1 };
    if cap < root {
        return precondition("depth cap below the root length");
    }
    let order = |len: usize| if covering { len - m } else { len + 1 - m };
    let mut total = 0.0;
    for w in words_meeting(z, root) {
        let mut best: Option<f64> = None;
        for fam in families(z, &w, cap, covering)? {
            let mut s = 0.0;
            for u in &fam {
                let nu = order(u.len());
                let g = center_weight(z, f, u, nu, covering).expect("cylinder meets Z");
                s += (g - alpha * nu as f64).exp();
            }
            best = Some(match best {
                None => s,
                Some(b) if covering => b.min(s),
                Some(b) => b.max(s),
            });
        }
        total += best.unwrap_or(0.0);
    }
    Ok(total)
}

/// Smallest Σ e^{−α n_i + f_{n_i}} over covers of Z by cylinders of length
/// n+m through `cap`, found by listing every cover.
pub fn brute_force_cover_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential, cap: usize) -> Result<f64> {
    exhaustive(z, n, alpha, res, f, cap, true)
}

/// Largest Σ e^{−α n_i + f_{n_i}} over disjoint cylinders of length n+m−1
/// through `cap` meeting Z, found by listing every disjoint family.
pub fn brute_force_packing_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential, cap: usize) -> Result<f64> {
    exhaustive(z, n, alpha, res, f, cap, false)
}

/// Σ e^{f_n − αn} over the length-(n+m) cylinders meeting Z.
pub fn brute_force_fixed_order_sum(z: &SymbolicSet, n: usize, alpha: f64, res: Resolution, f: &BlockPotential) -> Result<f64> {
    if n == 0 {
        return precondition("order n must be at least 1");
    }
    Ok(words_meeting(z, n + res.m())
        .iter()
        .map(|w| (center_weight(z, f, w, n, true).expect("meets Z") - alpha * n as f64).exp())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{Subshift, Word};

    #[test]
    fn full_shift_counts() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::whole(&x);
        let f = BlockPotential::zero(&x);
        let r = Resolution::new(1).unwrap();
        assert_eq!(brute_force_fixed_order_sum(&z, 3, 0.0, r, &f).unwrap(), 16.0);
        // at α = log 2 every cover of the full shift costs the same
        let c = brute_force_cover_sum(&z, 2, 2f64.ln(), r, &f, 5).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn membership_sees_forbidden_words() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::periodic_orbit(&x, &Word::parse("01").unwrap()).unwrap();
        assert!(meets(&z, &[0, 1, 0]));
        assert!(!meets(&z, &[0, 0]));
        assert!(!meets(&SymbolicSet::empty(&x), &[]));
    }
}

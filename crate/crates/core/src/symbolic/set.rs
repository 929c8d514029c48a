use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::potential::{block_of, index_of};
use super::subshift::Subshift;
use super::word::Word;
use crate::error::{input, Result};

/// Classification of a cylinder against a set Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// [w] ∩ Z = ∅.
    Empty,
    /// [w] ∩ Z is nonempty but not known to be all of [w] ∩ X.
    Partial,
    /// [w] ∩ X ⊂ Z.
    Full,
}

impl Membership {
    pub fn is_empty(self) -> bool {
        self == Membership::Empty
    }
}

/// One building block of a set: points of X that start with one of `prefixes`
/// (any point when the list is empty) and never contain a `forbidden` factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Piece {
    #[serde(default)]
    pub prefixes: Vec<Word>,
    #[serde(default)]
    pub forbidden: Vec<Word>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetDescription {
    Empty,
    Whole,
    Union(Vec<Piece>),
}

const VALID: u8 = 1;
const LIVE: u8 = 2;
const SAFE: u8 = 4;

#[derive(Clone, Debug)]
struct CompiledPiece {
    prefixes: Vec<Word>,
    forbidden: Vec<Vec<u8>>,
    max_prefix: usize,
    window: usize,
    /// Flags per window block (base-k index).
    flags: Vec<u8>,
}

/// A closed subset Z ⊂ X described symbolically.
#[derive(Clone, Debug)]
pub struct SymbolicSet {
    sys: Subshift,
    description: SetDescription,
    pieces: Vec<CompiledPiece>,
}

/// Pieces beyond this count cannot be tracked in a node key.
pub const MAX_PIECES: usize = 64;

impl SymbolicSet {
    pub fn new(sys: &Subshift, description: SetDescription) -> Result<Self> {
        let raw = match &description {
            SetDescription::Empty => Vec::new(),
            SetDescription::Whole => vec![Piece::default()],
            SetDescription::Union(ps) => ps.clone(),
        };
        if raw.len() > MAX_PIECES {
            return input(format!("a set may have at most {MAX_PIECES} pieces"));
        }
        let k = sys.alphabet_size();
        let mut pieces = Vec::with_capacity(raw.len());
        for p in raw {
            for w in p.prefixes.iter().chain(&p.forbidden) {
                if w.symbols().iter().any(|&b| b as usize >= k) {
                    return input(format!("word {w} uses a symbol outside the alphabet"));
                }
            }
            if p.forbidden.iter().any(|w| w.is_empty()) {
                return input("forbidden words must be nonempty");
            }
            let prefixes: Vec<Word> = p.prefixes.iter().filter(|u| sys.is_allowed(u.symbols())).cloned().collect();
            if !p.prefixes.is_empty() && prefixes.is_empty() {
                // every prefix leaves the language: the piece is empty
                continue;
            }
            pieces.push(compile_piece(sys, prefixes, p.forbidden.iter().map(|w| w.symbols().to_vec()).collect())?);
        }
        Ok(SymbolicSet { sys: sys.clone(), description, pieces })
    }

    pub fn whole(sys: &Subshift) -> Self {
        Self::new(sys, SetDescription::Whole).expect("whole space")
    }

    pub fn empty(sys: &Subshift) -> Self {
        Self::new(sys, SetDescription::Empty).expect("empty set")
    }

    /// Union of the cylinders [w], w in `words`.
    pub fn cylinders(sys: &Subshift, words: &[Word]) -> Result<Self> {
        if words.is_empty() {
            return Ok(Self::empty(sys));
        }
        Self::new(sys, SetDescription::Union(vec![Piece { prefixes: words.to_vec(), forbidden: vec![] }]))
    }

    /// Points of X avoiding every word in `forbidden`.
    pub fn forbidding(sys: &Subshift, forbidden: &[Word]) -> Result<Self> {
        Self::new(sys, SetDescription::Union(vec![Piece { prefixes: vec![], forbidden: forbidden.to_vec() }]))
    }

    /// The sub-SFT of X using only transitions allowed by `matrix`.
    pub fn sub_shift(sys: &Subshift, matrix: &[Vec<u8>]) -> Result<Self> {
        let k = sys.alphabet_size();
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return input("sub-shift matrix must match the alphabet size");
        }
        let mut forbidden = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if sys.allows(a as u8, b as u8) && matrix[a][b] == 0 {
                    forbidden.push(Word::new(vec![a as u8, b as u8]));
                }
            }
        }
        Self::forbidding(sys, &forbidden)
    }

    /// The orbit of the periodic point p^∞.
    pub fn periodic_orbit(sys: &Subshift, period: &Word) -> Result<Self> {
        let p = primitive_root(period.symbols());
        if p.is_empty() {
            return input("periodic word must be nonempty");
        }
        let cyc: Vec<u8> = p.iter().chain(p.iter().take(1)).copied().collect();
        if !sys.is_allowed(&cyc) {
            return input(format!("periodic word {period} is not a cycle of the subshift"));
        }
        let len = p.len() + 1;
        let k = sys.alphabet_size();
        if k.checked_pow(len as u32).map_or(true, |s| s > 1 << 20) {
            return input("period too long for an orbit description");
        }
        let mut language = std::collections::HashSet::new();
        for i in 0..p.len() {
            let w: Vec<u8> = (0..len).map(|j| p[(i + j) % p.len()]).collect();
            language.insert(w);
        }
        let forbidden: Vec<Word> = (0..k.pow(len as u32))
            .map(|i| block_of(i, k, len))
            .filter(|w| sys.is_allowed(w) && !language.contains(w))
            .map(Word::new)
            .collect();
        Self::forbidding(sys, &forbidden)
    }

    pub fn union(sets: &[SymbolicSet]) -> Result<Self> {
        let Some(first) = sets.first() else {
            return input("union of no sets");
        };
        let mut pieces = Vec::new();
        for s in sets {
            if s.sys != first.sys {
                return input("union of sets over different subshifts");
            }
            match &s.description {
                SetDescription::Empty => {}
                SetDescription::Whole => return Ok(Self::whole(&first.sys)),
                SetDescription::Union(ps) => pieces.extend(ps.iter().cloned()),
            }
        }
        if pieces.is_empty() {
            return Ok(Self::empty(&first.sys));
        }
        Self::new(&first.sys, SetDescription::Union(pieces))
    }

    /// Z ∩ [u].
    pub fn restrict_to(&self, u: &Word) -> Result<Self> {
        let pieces: Vec<Piece> = match &self.description {
            SetDescription::Empty => vec![],
            SetDescription::Whole => vec![Piece { prefixes: vec![u.clone()], forbidden: vec![] }],
            SetDescription::Union(ps) => ps
                .iter()
                .filter_map(|p| {
                    let prefixes: Vec<Word> = if p.prefixes.is_empty() {
                        vec![u.clone()]
                    } else {
                        p.prefixes
                            .iter()
                            .filter_map(|v| {
                                if u.starts_with(v) {
                                    Some(u.clone())
                                } else if v.starts_with(u) {
                                    Some(v.clone())
                                } else {
                                    None
                                }
                            })
                            .collect()
                    };
                    (!prefixes.is_empty()).then(|| Piece { prefixes, forbidden: p.forbidden.clone() })
                })
                .collect(),
        };
        if pieces.is_empty() {
            return Ok(Self::empty(&self.sys));
        }
        Self::new(&self.sys, SetDescription::Union(pieces))
    }

    pub fn subshift(&self) -> &Subshift {
        &self.sys
    }

    pub fn description(&self) -> &SetDescription {
        &self.description
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Whether Z itself is empty.
    pub fn is_empty_set(&self) -> bool {
        self.classify(&Word::empty()) == Membership::Empty
    }

    pub fn classify(&self, w: &Word) -> Membership {
        self.classify_symbols(w.symbols())
    }

    pub(crate) fn classify_symbols(&self, w: &[u8]) -> Membership {
        if !self.sys.is_allowed(w) {
            return Membership::Empty;
        }
        let mut any = false;
        for p in &self.pieces {
            match p.classify(&self.sys, w) {
                Membership::Full => return Membership::Full,
                Membership::Partial => any = true,
                Membership::Empty => {}
            }
        }
        if !any {
            return Membership::Empty;
        }
        // pieces may jointly fill a cylinder while their prefixes are still undecided
        if w.len() < self.max_prefix() {
            let mut all_full = true;
            let mut buf = w.to_vec();
            for b in self.sys.next_symbols(w) {
                buf.push(b);
                let c = self.classify_symbols(&buf);
                buf.pop();
                if c != Membership::Full {
                    all_full = false;
                    break;
                }
            }
            if all_full {
                return Membership::Full;
            }
        }
        Membership::Partial
    }

    pub(crate) fn max_prefix(&self) -> usize {
        self.pieces.iter().map(|p| p.max_prefix).max().unwrap_or(0)
    }

    pub(crate) fn max_window(&self) -> usize {
        self.pieces.iter().map(|p| p.window).max().unwrap_or(1)
    }

    /// Word length from which the pair (alive mask, last `max_window` symbols)
    /// determines the whole subtree below a node.
    pub(crate) fn key_threshold(&self) -> usize {
        self.max_prefix().max(self.max_window())
    }

    /// Pieces whose prefix constraint is met and whose forbidden words do not occur in `w`.
    /// Meaningful once |w| is at least the largest prefix length.
    pub(crate) fn alive_mask(&self, w: &[u8]) -> u64 {
        let mut mask = 0u64;
        for (i, p) in self.pieces.iter().enumerate() {
            let matched = p.prefixes.is_empty() || p.prefixes.iter().any(|u| w.starts_with(u.symbols()));
            if matched && p.avoids(w) {
                mask |= 1 << i;
            }
        }
        mask
    }

    /// Updates an alive mask after appending the last symbol of `tail`.
    pub(crate) fn step_mask(&self, mask: u64, tail: &[u8]) -> u64 {
        let mut out = mask;
        for (i, p) in self.pieces.iter().enumerate() {
            if mask & (1 << i) != 0 && p.has_forbidden_suffix(tail) {
                out &= !(1 << i);
            }
        }
        out
    }

    /// Whether a node with the given alive mask and suffix (length ≥ max window) meets Z.
    pub(crate) fn mask_nonempty(&self, mask: u64, tail: &[u8]) -> bool {
        let k = self.sys.alphabet_size();
        self.pieces.iter().enumerate().any(|(i, p)| {
            mask & (1 << i) != 0 && p.flags[index_of(&tail[tail.len() - p.window..], k)] & LIVE != 0
        })
    }

    /// Number of words of length `len` whose cylinder meets Z.
    pub fn count_meeting(&self, len: usize) -> u128 {
        let key_len = self.key_threshold();
        if len <= key_len {
            return self.sys.words_of_length(len).iter().filter(|w| !self.classify(w).is_empty()).count() as u128;
        }
        let s = self.max_window();
        let mut level: HashMap<(u64, Vec<u8>), u128> = HashMap::new();
        for w in self.sys.words_of_length(key_len) {
            if self.classify(&w).is_empty() {
                continue;
            }
            let key = (self.alive_mask(w.symbols()), w.symbols()[key_len - s..].to_vec());
            *level.entry(key).or_insert(0) += 1;
        }
        for _ in key_len..len {
            let mut next: HashMap<(u64, Vec<u8>), u128> = HashMap::new();
            for ((mask, tail), c) in &level {
                for b in self.sys.next_symbols(tail) {
                    let mut t = tail.clone();
                    t.push(b);
                    let m2 = self.step_mask(*mask, &t);
                    t.remove(0);
                    if m2 != 0 && self.mask_nonempty(m2, &t) {
                        let e = next.entry((m2, t)).or_insert(0);
                        *e = e.saturating_add(*c);
                    }
                }
            }
            level = next;
        }
        level.values().fold(0u128, |a, c| a.saturating_add(*c))
    }
}

impl CompiledPiece {
    fn avoids(&self, w: &[u8]) -> bool {
        self.forbidden.iter().all(|f| !w.windows(f.len()).any(|x| x == f.as_slice()))
    }

    fn has_forbidden_suffix(&self, w: &[u8]) -> bool {
        self.forbidden.iter().any(|f| w.ends_with(f))
    }

    fn classify(&self, sys: &Subshift, w: &[u8]) -> Membership {
        if !self.prefixes.is_empty() && !self.prefixes.iter().any(|u| w.starts_with(u.symbols())) {
            // some prefix may still be reachable below w
            let pending: Vec<&Word> = self.prefixes.iter().filter(|u| u.symbols().starts_with(w)).collect();
            if pending.is_empty() {
                return Membership::Empty;
            }
            let mut any = false;
            let mut all_full = true;
            let mut buf = w.to_vec();
            for b in sys.next_symbols(w) {
                buf.push(b);
                match self.classify(sys, &buf) {
                    Membership::Empty => all_full = false,
                    Membership::Partial => {
                        any = true;
                        all_full = false
                    }
                    Membership::Full => any = true,
                }
                buf.pop();
            }
            return match (any, all_full) {
                (false, _) => Membership::Empty,
                (true, true) => Membership::Full,
                (true, false) => Membership::Partial,
            };
        }
        if !self.avoids(w) {
            return Membership::Empty;
        }
        let (live, safe) = self.future(sys, w);
        match (live, safe) {
            (false, _) => Membership::Empty,
            (true, true) => Membership::Full,
            (true, false) => Membership::Partial,
        }
    }

    /// (some infinite continuation stays in the piece, every continuation does).
    fn future(&self, sys: &Subshift, w: &[u8]) -> (bool, bool) {
        let k = sys.alphabet_size();
        if w.len() >= self.window {
            let f = self.flags[index_of(&w[w.len() - self.window..], k)];
            return (f & LIVE != 0, f & SAFE != 0);
        }
        let mut live = false;
        let mut safe = true;
        let mut buf = w.to_vec();
        for b in sys.next_symbols(w) {
            buf.push(b);
            if self.has_forbidden_suffix(&buf) {
                safe = false;
            } else {
                let (l, s) = self.future(sys, &buf);
                live |= l;
                safe &= s;
            }
            buf.pop();
        }
        (live, safe)
    }
}

fn compile_piece(sys: &Subshift, prefixes: Vec<Word>, forbidden: Vec<Vec<u8>>) -> Result<CompiledPiece> {
    let k = sys.alphabet_size();
    let window = forbidden.iter().map(|f| f.len().saturating_sub(1)).max().unwrap_or(1).max(1);
    let n_states = k
        .checked_pow(window as u32)
        .filter(|n| *n <= 1 << 22)
        .ok_or_else(|| crate::error::Error::Input("forbidden words too long".into()))?;
    let max_prefix = prefixes.iter().map(|u| u.len()).max().unwrap_or(0);
    let mut piece = CompiledPiece { prefixes, forbidden, max_prefix, window, flags: vec![0u8; n_states] };

    let blocks: Vec<Vec<u8>> = (0..n_states).map(|i| block_of(i, k, window)).collect();
    let in_x: Vec<bool> = blocks.iter().map(|b| sys.is_allowed(b)).collect();
    for i in 0..n_states {
        if in_x[i] && piece.avoids(&blocks[i]) {
            piece.flags[i] |= VALID;
        }
    }
    // edges of X between window blocks: (target, creates a forbidden word)
    let edges: Vec<Vec<(usize, bool)>> = (0..n_states)
        .map(|i| {
            if !in_x[i] {
                return Vec::new();
            }
            let b = &blocks[i];
            sys.successors(*b.last().unwrap())
                .map(|c| {
                    let mut ext = b.clone();
                    ext.push(c);
                    let bad = piece.has_forbidden_suffix(&ext);
                    (index_of(&ext[1..], k), bad)
                })
                .collect()
        })
        .collect();

    // live: valid states with an infinite forbidden-free path
    let mut live: Vec<bool> = (0..n_states).map(|i| piece.flags[i] & VALID != 0).collect();
    loop {
        let mut changed = false;
        for i in 0..n_states {
            if live[i] && !edges[i].iter().any(|(t, bad)| !bad && live[*t]) {
                live[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    // unsafe: some X-path creates a forbidden word
    let mut unsafe_: Vec<bool> = (0..n_states).map(|i| edges[i].iter().any(|(_, bad)| *bad)).collect();
    loop {
        let mut changed = false;
        for i in 0..n_states {
            if !unsafe_[i] && in_x[i] && edges[i].iter().any(|(t, _)| unsafe_[*t]) {
                unsafe_[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for i in 0..n_states {
        if live[i] {
            piece.flags[i] |= LIVE;
            if !unsafe_[i] {
                piece.flags[i] |= SAFE;
            }
        }
    }
    Ok(piece)
}

fn primitive_root(p: &[u8]) -> Vec<u8> {
    let n = p.len();
    for d in 1..=n {
        if n % d == 0 && (0..n).all(|i| p[i] == p[i % d]) {
            return p[..d].to_vec();
        }
    }
    p.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn cylinder_union_classification() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::cylinders(&x, &[w("01"), w("110")]).unwrap();
        assert_eq!(z.classify(&w("0")), Membership::Partial);
        assert_eq!(z.classify(&w("01")), Membership::Full);
        assert_eq!(z.classify(&w("0111")), Membership::Full);
        assert_eq!(z.classify(&w("00")), Membership::Empty);
        assert_eq!(z.classify(&w("11")), Membership::Partial);
        assert_eq!(z.classify(&w("111")), Membership::Empty);
    }

    #[test]
    fn split_prefixes_fill_parent() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::cylinders(&x, &[w("00"), w("01")]).unwrap();
        assert_eq!(z.classify(&w("0")), Membership::Full);
    }

    #[test]
    fn periodic_orbit_is_thin() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::periodic_orbit(&x, &w("01")).unwrap();
        assert_eq!(z.classify(&w("0101")), Membership::Partial);
        assert_eq!(z.classify(&w("0110")), Membership::Empty);
        for n in 1..8 {
            assert_eq!(z.count_meeting(n), 2);
        }
        let fixed = SymbolicSet::periodic_orbit(&x, &w("000")).unwrap();
        assert_eq!(fixed.count_meeting(5), 1);
    }

    #[test]
    fn golden_mean_inside_full_shift() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::sub_shift(&x, &[vec![1, 1], vec![1, 0]]).unwrap();
        let fib = [2u128, 3, 5, 8, 13, 21, 34, 55];
        for (i, f) in fib.iter().enumerate() {
            assert_eq!(z.count_meeting(i + 1), *f);
        }
        assert_eq!(z.classify(&w("0")), Membership::Partial);
    }

    #[test]
    fn stranded_words_are_empty() {
        // forbidding 00 and 11 leaves only the alternating orbit; forbidding 0 and 1 leaves nothing
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::forbidding(&x, &[w("0"), w("1")]).unwrap();
        assert!(z.is_empty_set());
        let y = SymbolicSet::forbidding(&x, &[w("10"), w("11")]).unwrap();
        // only 0^∞ survives
        assert_eq!(y.classify(&w("01")), Membership::Empty);
        assert_eq!(y.count_meeting(6), 1);
    }

    #[test]
    fn restriction() {
        let x = Subshift::full(2).unwrap();
        let z = SymbolicSet::whole(&x).restrict_to(&w("10")).unwrap();
        assert_eq!(z.count_meeting(4), 4);
        let e = SymbolicSet::cylinders(&x, &[w("0")]).unwrap().restrict_to(&w("1")).unwrap();
        assert!(e.is_empty_set());
    }
}

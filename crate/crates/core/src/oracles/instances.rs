//! Seeded random instances small enough for exhaustive enumeration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measures::{rational_from_decimal, MarkovMeasure};
use crate::symbolic::{BlockPotential, Piece, Resolution, SetDescription, Subshift, SymbolicSet, Word};

#[derive(Clone, Debug)]
pub struct SmallInstance {
    pub z: SymbolicSet,
    pub f: BlockPotential,
    pub res: Resolution,
    pub n: usize,
    /// Longest cylinder a cover or packing may use.
    pub cap: usize,
    pub alpha: f64,
    pub label: String,
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> Word {
    Word::new((0..len).map(|_| rng.gen_range(0..2u8)).collect())
}

fn show(ws: &[Word]) -> String {
    ws.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
}

fn random_set(rng: &mut ChaCha8Rng, sys: &Subshift) -> (SymbolicSet, String) {
    let words = |rng: &mut ChaCha8Rng, lo: usize, hi: usize| -> Vec<Word> {
        (0..rng.gen_range(1..=2)).map(|_| {
            let len = rng.gen_range(lo..=hi);
            random_word(rng, len)
        }).collect()
    };
    loop {
        let (z, label) = match rng.gen_range(0..5) {
            0 => (Ok(SymbolicSet::whole(sys)), "whole".to_string()),
            1 => {
                let w = words(rng, 1, 3);
                (SymbolicSet::cylinders(sys, &w), format!("cylinders {}", show(&w)))
            }
            2 => {
                let w = words(rng, 2, 3);
                (SymbolicSet::forbidding(sys, &w), format!("forbidding {}", show(&w)))
            }
            3 => {
                let len = rng.gen_range(1..=3);
                let w = random_word(rng, len);
                (SymbolicSet::periodic_orbit(sys, &w), format!("orbit of {w}"))
            }
            _ => {
                let a = Piece { prefixes: words(rng, 1, 2), forbidden: vec![] };
                let b = Piece { prefixes: vec![], forbidden: words(rng, 2, 3) };
                let label = format!("cylinders {} or forbidding {}", show(&a.prefixes), show(&b.forbidden));
                (SymbolicSet::new(sys, SetDescription::Union(vec![a, b])), label)
            }
        };
        // orbits that leave the subshift are redrawn
        if let Ok(z) = z {
            return (z, label);
        }
    }
}

/// A two-symbol instance with words no longer than 7.
pub fn small_instance(seed: u64) -> SmallInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sys = if rng.gen_bool(0.6) { Subshift::full(2).unwrap() } else { Subshift::golden_mean() };
    let (z, set_label) = random_set(&mut rng, &sys);
    let r = rng.gen_range(1..=2usize);
    let table: Vec<f64> = (0..2usize.pow(r as u32)).map(|_| (rng.gen_range(-1.0..1.0f64) * 100.0).round() / 100.0).collect();
    let f = BlockPotential::new(&sys, r, table).unwrap();
    let m = rng.gen_range(1..=3usize);
    let n = rng.gen_range(1..=3usize).min(6 - m).max(1);
    let cap = (n + m + rng.gen_range(0..=2)).min(7);
    let alpha = (rng.gen_range(-0.5..1.5f64) * 100.0).round() / 100.0;
    let label = format!("seed {seed}: {} {set_label}, r={r}, m={m}, n={n}, cap={cap}, alpha={alpha}", if sys.is_irreducible() && sys.count_words(2) == 4 { "full" } else { "golden" });
    SmallInstance { z, f, res: Resolution::new(m).unwrap(), n, cap, alpha, label }
}

/// A random set and potential on a two-symbol subshift, for property suites.
#[derive(Clone, Debug)]
pub struct PropertyInstance {
    pub z: SymbolicSet,
    pub f: BlockPotential,
    pub label: String,
}

pub fn property_instance(seed: u64) -> PropertyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let sys = if rng.gen_bool(0.6) { Subshift::full(2).unwrap() } else { Subshift::golden_mean() };
    let (z, set_label) = random_set(&mut rng, &sys);
    let r = rng.gen_range(1..=2usize);
    let table: Vec<f64> = (0..2usize.pow(r as u32)).map(|_| (rng.gen_range(-1.0..1.0f64) * 100.0).round() / 100.0).collect();
    let f = BlockPotential::new(&sys, r, table).unwrap();
    let name = if sys.count_words(2) == 4 { "full" } else { "golden" };
    PropertyInstance { z, f, label: format!("seed {seed}: {name} {set_label}, r={r}") }
}

/// Two-symbol Markov measure with transition probabilities in quarters, kept exact.
pub fn small_rational_measure(seed: u64) -> MarkovMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = |rng: &mut ChaCha8Rng| rng.gen_range(1..=3u32);
    let (a, b) = (q(&mut rng), q(&mut rng));
    let row = |x: u32| vec![rational_from_decimal(&format!("{x}/4")).unwrap(), rational_from_decimal(&format!("{}/4", 4 - x)).unwrap()];
    if rng.gen_bool(0.5) {
        MarkovMeasure::bernoulli_exact(&row(a)).unwrap()
    } else {
        MarkovMeasure::markov_exact(&[row(a), row(b)], None).unwrap()
    }
}

/// Markov measure on the full k-shift with all transitions in [0.1, 0.9]-ish proportions.
pub fn random_markov(seed: u64, k: usize) -> MarkovMeasure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.iter().map(|x| x / s).collect()
        })
        .collect();
    MarkovMeasure::markov(&rows, None).unwrap()
}

/// Potential depending on one symbol with values in [−1, 1].
pub fn random_symbol_potential(seed: u64, sys: &Subshift) -> BlockPotential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let v: Vec<f64> = (0..sys.alphabet_size()).map(|_| (rng.gen_range(-1.0..1.0f64) * 100.0).round() / 100.0).collect();
    BlockPotential::from_symbols(sys, &v).unwrap()
}

use proptest::prelude::*;

use pressure_core::engine::{cover_sum, StageSchedule};
use pressure_core::generic::{generic_words, NeighborhoodSpec};
use pressure_core::measures::MarkovMeasure;
use pressure_core::oracles::{property_instance, random_markov, transfer_pressure};
use pressure_core::pressures::{pesin_pitskel_pressure, set_pressures, SetSchedule};
use pressure_core::symbolic::{f_variation, BlockPotential, Resolution, Subshift, Word};

fn light_schedule() -> SetSchedule {
    SetSchedule { m_list: vec![1, 2], stage: StageSchedule { n_list: vec![6, 12], depth_cap: 18, ..StageSchedule::default() } }
}

/// A subshift on 2 or 3 symbols with no stranded symbol.
fn subshift() -> impl Strategy<Value = Subshift> {
    (2usize..=3)
        .prop_flat_map(|k| prop::collection::vec(prop::collection::vec(0u8..=1, k), k))
        .prop_filter_map("stranded symbol", |m| Subshift::new(&m).ok())
}

fn potential(sys: Subshift) -> impl Strategy<Value = (Subshift, BlockPotential)> {
    let k = sys.alphabet_size();
    (1usize..=2).prop_flat_map(move |r| {
        let sys = sys.clone();
        prop::collection::vec(-2.0f64..2.0, k.pow(r as u32)).prop_map(move |t| {
            let f = BlockPotential::new(&sys, r, t).unwrap();
            (sys.clone(), f)
        })
    })
}

fn system_and_potential() -> impl Strategy<Value = (Subshift, BlockPotential)> {
    subshift().prop_flat_map(potential)
}

fn permutation(k: usize) -> impl Strategy<Value = Vec<u8>> {
    Just((0..k as u8).collect::<Vec<u8>>()).prop_shuffle()
}

fn permuted_subshift(sys: &Subshift, perm: &[u8]) -> Subshift {
    let k = sys.alphabet_size();
    let old = sys.matrix();
    let mut m = vec![vec![0u8; k]; k];
    for a in 0..k {
        for b in 0..k {
            m[perm[a] as usize][perm[b] as usize] = old[a][b];
        }
    }
    Subshift::new(&m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_shifts_with_constants((sys, f) in system_and_potential(), c in -3.0f64..3.0) {
        let base = transfer_pressure(&sys, &f).unwrap();
        let shifted = transfer_pressure(&sys, &f.shifted(c)).unwrap();
        prop_assert!((shifted.value - base.value - c).abs() < 1e-9);
    }

    #[test]
    fn transfer_ignores_relabeling(((sys, f), perm) in system_and_potential().prop_flat_map(|(s, f)| {
        let k = s.alphabet_size();
        (Just((s, f)), permutation(k))
    })) {
        let relabeled = permuted_subshift(&sys, &perm);
        let g = f.permuted(&perm, &relabeled).unwrap();
        let a = transfer_pressure(&sys, &f).unwrap().value;
        let b = transfer_pressure(&relabeled, &g).unwrap().value;
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn transfer_lies_in_admissible_range((sys, f) in system_and_potential()) {
        let t = transfer_pressure(&sys, &f).unwrap();
        prop_assert!(t.value >= f.min_value() - 1e-9);
        prop_assert!(t.value <= (sys.alphabet_size() as f64).ln() + f.max_value() + 1e-9);
    }

    #[test]
    fn word_counts_follow_the_transition_matrix(sys in subshift(), n in 1usize..8) {
        let m = sys.matrix();
        let k = sys.alphabet_size();
        let mut ends = vec![1u128; k];
        for _ in 1..n {
            ends = (0..k).map(|b| (0..k).filter(|&a| m[a][b] == 1).map(|a| ends[a]).sum()).collect();
        }
        prop_assert_eq!(sys.count_words(n), ends.iter().sum::<u128>());
        prop_assert_eq!(sys.words_of_length(n).len() as u128, sys.count_words(n));
    }

    #[test]
    fn birkhoff_sums_are_additive(
        (sys, f) in system_and_potential(),
        seed in any::<u64>(),
        a in 1usize..5,
        b in 1usize..5,
    ) {
        let words = sys.words_of_length(a + b + f.range() - 1);
        prop_assume!(!words.is_empty());
        let w = &words[(seed as usize) % words.len()];
        let whole = f.birkhoff_sum(w.symbols(), a + b).unwrap();
        let head = f.birkhoff_sum(w.symbols(), a).unwrap();
        let tail = f.birkhoff_sum(w.shifted(a).symbols(), b).unwrap();
        prop_assert!((whole - head - tail).abs() < 1e-12);
    }

    #[test]
    fn variation_shrinks_with_resolution((_, f) in system_and_potential()) {
        let v: Vec<f64> = (1..=4).map(|m| f_variation(&f, Resolution::new(m).unwrap())).collect();
        prop_assert!(v.windows(2).all(|w| w[1] <= w[0]));
        for m in f.range()..=4 {
            prop_assert_eq!(v[m - 1], 0.0);
        }
    }

    #[test]
    fn cylinder_measures_are_consistent(seed in any::<u64>(), k in 2usize..=3, w in prop::collection::vec(0u8..3, 0..6)) {
        let mu = random_markov(seed, k);
        let w: Vec<u8> = w.into_iter().map(|s| s % k as u8).collect();
        let parent = mu.cylinder_measure(&Word::new(w.clone()));
        let children: f64 = (0..k as u8).map(|b| {
            let mut c = w.clone();
            c.push(b);
            mu.cylinder_measure(&Word::new(c))
        }).sum();
        prop_assert!((parent - children).abs() < 1e-12);
    }

    #[test]
    fn integrals_are_linear(seed in any::<u64>(), f in prop::collection::vec(-2.0f64..2.0, 4), g in prop::collection::vec(-2.0f64..2.0, 2)) {
        let sys = Subshift::full(2).unwrap();
        let mu = random_markov(seed, 2);
        let f = BlockPotential::new(&sys, 2, f).unwrap();
        let g = BlockPotential::new(&sys, 1, g).unwrap();
        let sum = f.add(&g, &sys).unwrap();
        prop_assert!((mu.integral(&sum) - mu.integral(&f) - mu.integral(&g)).abs() < 1e-12);
    }

    #[test]
    fn entropy_ignores_relabeling(seed in any::<u64>(), perm in permutation(3)) {
        let mu = random_markov(seed, 3);
        let nu: MarkovMeasure = mu.permuted(&perm).unwrap();
        prop_assert!((mu.entropy() - nu.entropy()).abs() < 1e-12);
    }

    #[test]
    fn generic_words_grow_with_eta(seed in any::<u64>(), eta in 0.0f64..0.3, extra in 0.0f64..0.3, n in 2usize..9) {
        let sys = Subshift::full(2).unwrap();
        let mu = random_markov(seed, 2);
        let narrow = generic_words(&sys, &NeighborhoodSpec::new(1, eta, mu.clone()).unwrap(), n).unwrap();
        let wide = generic_words(&sys, &NeighborhoodSpec::new(1, eta + extra, mu).unwrap(), n).unwrap();
        prop_assert!(narrow.iter().all(|w| wide.contains(w)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn set_pressures_are_ordered(seed in any::<u64>()) {
        let inst = property_instance(seed);
        let [bowen, lower, upper, packing] = set_pressures(&inst.z, &inst.f, &light_schedule()).unwrap();
        let below = |a: f64, b: f64| a == f64::NEG_INFINITY || a <= b + 1e-9;
        prop_assert!(below(bowen.bracket.0, lower.bracket.1), "{}", inst.label);
        prop_assert!(below(lower.bracket.0, upper.bracket.1), "{}", inst.label);
        prop_assert!(below(bowen.bracket.0, packing.bracket.1), "{}", inst.label);
        prop_assert!(below(packing.bracket.0, upper.bracket.1), "{}", inst.label);
    }

    #[test]
    fn bowen_pressure_shifts_with_constants(seed in any::<u64>(), c in -1.0f64..1.0) {
        let inst = property_instance(seed);
        prop_assume!(!inst.z.is_empty_set());
        let schedule = light_schedule();
        let base = pesin_pitskel_pressure(&inst.z, &inst.f, &schedule).unwrap();
        let moved = pesin_pitskel_pressure(&inst.z, &inst.f.shifted(c), &schedule).unwrap();
        let slack = 1e-6 + 0.5 * (base.width() + moved.width());
        prop_assert!((moved.value - base.value - c).abs() <= slack, "{}: {} vs {}", inst.label, moved.value, base.value + c);
    }

    #[test]
    fn cover_sums_grow_with_the_set(seed in any::<u64>(), first in 0u8..2, alpha in 0.0f64..1.5) {
        let inst = property_instance(seed);
        let cell = inst.z.restrict_to(&Word::new(vec![first])).unwrap();
        let res = Resolution::new(1).unwrap();
        let whole = cover_sum(&inst.z, 3, alpha, res, &inst.f, 9).unwrap();
        let part = cover_sum(&cell, 3, alpha, res, &inst.f, 9).unwrap();
        prop_assert!(part.value <= whole.value * (1.0 + 1e-12) + 1e-300, "{}", inst.label);
    }
}

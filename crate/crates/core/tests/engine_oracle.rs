use pressure_core::engine::{brute_force_fixed_order_katok, cover_sum, fixed_order_cover_sum, katok_cover_sum, packing_sum, KatokMode};
use pressure_core::oracles::{brute_force_cover_sum, brute_force_fixed_order_sum, brute_force_packing_sum, small_instance, small_rational_measure};
use pressure_core::symbolic::{BlockPotential, Resolution, Subshift};

fn same(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

#[test]
fn word_tree_sums_match_enumeration() {
    for seed in 0..200 {
        let c = small_instance(seed);
        let cover = cover_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap).unwrap().value;
        let brute = brute_force_cover_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap).unwrap();
        assert!(same(cover, brute), "cover {}: {cover} vs {brute}", c.label);
        let pack = packing_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap).unwrap().value;
        let brute = brute_force_packing_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap).unwrap();
        assert!(same(pack, brute), "packing {}: {pack} vs {brute}", c.label);
        let fixed = fixed_order_cover_sum(&c.z, c.n, c.alpha, c.res, &c.f).unwrap();
        let brute = brute_force_fixed_order_sum(&c.z, c.n, c.alpha, c.res, &c.f).unwrap();
        assert!(same(fixed, brute), "fixed order {}: {fixed} vs {brute}", c.label);
    }
}

#[test]
fn fixed_order_katok_matches_enumeration() {
    let x = Subshift::full(2).unwrap();
    for seed in 0..60u64 {
        let mu = small_rational_measure(seed);
        let f = BlockPotential::from_symbols(&x, &[0.1 * (seed % 7) as f64, -0.3]).unwrap();
        let m = 1 + (seed % 2) as usize;
        let n = (1 + (seed % 3) as usize).min(4 - m);
        let delta = [0.1, 0.25, 0.5, 0.8][(seed % 4) as usize];
        let res = Resolution::new(m).unwrap();
        let engine = katok_cover_sum(&mu, n, 0.2, res, delta, &f, KatokMode::FixedOrder).unwrap().value;
        let brute = brute_force_fixed_order_katok(&mu, &f, res, n, 0.2, delta).unwrap();
        assert!(same(engine, brute), "seed {seed}: {engine} vs {brute}");
    }
}

use std::time::Instant;

use super::{excess, half_width, Check, SuiteInput, SuiteReport};
use crate::engine::{
    brute_force_fixed_order_katok, cover_sum, fixed_order_cover_sum, katok_cover_sum, modified_packing_sum, packing_sum, KatokMode,
};
use crate::error::Result;
use crate::estimate::PressureEstimate;
use crate::generic::{generic_words, log_separated_pressure, NeighborhoodSpec};
use crate::oracles::{
    brute_force_cover_sum, brute_force_fixed_order_sum, brute_force_packing_sum, property_instance, random_markov, random_symbol_potential,
    small_instance, small_rational_measure, transfer_pressure,
};
use crate::pressures::{set_pressures, SetSchedule};
use crate::symbolic::{BlockPotential, Resolution, Subshift, SymbolicSet, Word};

const NAMES: [&str; 4] = ["P^B", "lower CP", "upper CP", "P^P"];

/// Largest gap seen so far and where; NaN sticks.
struct Worst {
    gap: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst { gap: f64::NEG_INFINITY, at: String::new() }
    }

    fn see(&mut self, gap: f64, at: impl FnOnce() -> String) {
        if self.gap.is_nan() {
            return;
        }
        if gap.is_nan() || gap > self.gap {
            self.gap = gap;
            self.at = at();
        }
    }

    fn check(self, name: &str, limit: f64) -> Check {
        if self.at.is_empty() {
            Check::at_most(name, self.gap, limit)
        } else {
            Check::at_most(format!("{name} (worst at {})", self.at), self.gap, limit)
        }
    }
}

/// Relative amount by which `a` exceeds `b`.
fn rel_excess(a: f64, b: f64) -> f64 {
    if a <= b {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        (a - b) / a.abs().max(b.abs())
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    rel_excess(a, b).max(rel_excess(b, a))
}

/// Whole-system pressures against the transfer operator.
pub(super) fn transfer(input: &SuiteInput, report: &mut SuiteReport) -> Result<()> {
    let tol = input.tol_or(0.03);
    let systems: Vec<(String, Subshift, Vec<(String, BlockPotential)>)> = match input.document {
        Some(doc) => vec![(doc.name.clone(), doc.subshift.clone(), vec![("document potential".into(), doc.potential.clone())])],
        None => [("full 2-shift", Subshift::full(2)?), ("golden mean", Subshift::golden_mean())]
            .into_iter()
            .map(|(name, sys)| {
                let fs = vec![("f=0".to_string(), BlockPotential::zero(&sys)), ("f(1)=log 2".to_string(), BlockPotential::from_symbols(&sys, &[0.0, 2f64.ln()]).unwrap())];
                (name.to_string(), sys, fs)
            })
            .collect(),
    };
    let schedule = SetSchedule::default();
    for (name, sys, potentials) in systems {
        let start = Instant::now();
        for (fl, f) in potentials {
            let target = transfer_pressure(&sys, &f)?.value;
            match set_pressures(&SymbolicSet::whole(&sys), &f, &schedule) {
                Ok(est) => {
                    for (e, q) in est.iter().zip(NAMES) {
                        report.push(Check::at_most(format!("{name}, {fl}: |{q} - transfer {target:.6}|"), (e.value - target).abs(), tol));
                    }
                }
                Err(e) => report.failed(format!("{name}, {fl}"), &e),
            }
        }
        report.push(Check::at_most(format!("{name}: seconds"), start.elapsed().as_secs_f64(), 60.0));
    }
    Ok(())
}

/// Sets to run the set-pressure properties on: the document's, or seeded random ones.
fn property_sets(input: &SuiteInput, count: u64) -> Vec<(String, SymbolicSet, BlockPotential)> {
    match input.document {
        Some(doc) => doc.sets.iter().map(|(n, z)| (format!("{}/{n}", doc.name), z.clone(), doc.potential.clone())).collect(),
        None => (0..count)
            .map(|i| {
                let p = property_instance(input.seed.wrapping_add(i));
                (p.label, p.z, p.f)
            })
            .collect(),
    }
}

/// P^B ≤ lower CP ≤ upper CP and P^B ≤ P^P ≤ upper CP.
pub(super) fn chain(input: &SuiteInput, report: &mut SuiteReport) {
    let slack = input.tol_or(1e-9);
    let pairs = [(0, 1), (1, 2), (0, 3), (3, 2)];
    let mut worst: Vec<Worst> = pairs.iter().map(|_| Worst::new()).collect();
    for (label, z, f) in property_sets(input, 20) {
        match set_pressures(&z, &f, &SetSchedule::default()) {
            Ok(est) => {
                for (w, &(a, b)) in worst.iter_mut().zip(&pairs) {
                    w.see(excess(est[a].bracket.0, est[b].bracket.1), || label.clone());
                }
            }
            Err(e) => report.failed(label, &e),
        }
    }
    for (w, &(a, b)) in worst.into_iter().zip(&pairs) {
        report.push(w.check(&format!("{} <= {}", NAMES[a], NAMES[b]), slack));
    }
}

/// Bracket of the largest cell value.
fn max_over(cells: &[[PressureEstimate; 4]], i: usize) -> (f64, f64) {
    cells.iter().fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, c| (acc.0.max(c[i].bracket.0), acc.1.max(c[i].bracket.1)))
}

struct Structure {
    sums_in_z: Worst,
    pressures_in_z: Worst,
    cover_subadditive: Worst,
    modified_packing_subadditive: Worst,
    bowen_union: Worst,
    packing_union: Worst,
    capacity_lower_union: Worst,
    capacity_upper_union: Worst,
    shift_sums: Worst,
    shift_pressures: Worst,
    finer_m: Worst,
    smaller_delta: Worst,
    larger_eta: Worst,
}

/// Monotonicity in Z, union rules, constant shifts and monotonicity in m, δ and η.
pub(super) fn structure(input: &SuiteInput, report: &mut SuiteReport) {
    let mut s = Structure {
        sums_in_z: Worst::new(),
        pressures_in_z: Worst::new(),
        cover_subadditive: Worst::new(),
        modified_packing_subadditive: Worst::new(),
        bowen_union: Worst::new(),
        packing_union: Worst::new(),
        capacity_lower_union: Worst::new(),
        capacity_upper_union: Worst::new(),
        shift_sums: Worst::new(),
        shift_pressures: Worst::new(),
        finer_m: Worst::new(),
        smaller_delta: Worst::new(),
        larger_eta: Worst::new(),
    };
    let schedule = SetSchedule::default();
    for (i, (label, z, f)) in property_sets(input, 100).into_iter().enumerate() {
        let seed = input.seed.wrapping_add(i as u64);
        if let Err(e) = structure_case(&mut s, seed, &label, &z, &f, &schedule) {
            report.failed(label, &e);
        }
    }
    let exact = 1e-12;
    let within = input.tol_or(1e-9);
    report.push(s.sums_in_z.check("subset sums <= set sums", exact));
    report.push(s.pressures_in_z.check("subset pressures <= set pressures", within));
    report.push(s.cover_subadditive.check("cover sum of a union <= sum over cells", exact));
    report.push(s.modified_packing_subadditive.check("modified packing sum of a union <= sum over cells", exact));
    report.push(s.bowen_union.check("P^B of a union = max over cells", within));
    report.push(s.packing_union.check("P^P of a union = max over cells", within));
    report.push(s.capacity_lower_union.check("lower CP of a union >= max over cells", within));
    report.push(s.capacity_upper_union.check("upper CP of a union >= max over cells", within));
    report.push(s.shift_sums.check("sums invariant under f + c, alpha + c", 1e-9));
    report.push(s.shift_pressures.check("pressures of f + c shift by c", 1e-6));
    report.push(s.finer_m.check("fixed-order sums grow with m", exact));
    report.push(s.smaller_delta.check("Katok sums grow as delta shrinks", exact));
    report.push(s.larger_eta.check("separated pressure grows with eta", exact));
}

fn structure_case(s: &mut Structure, seed: u64, label: &str, z: &SymbolicSet, f: &BlockPotential, schedule: &SetSchedule) -> Result<()> {
    let at = || label.to_string();
    let sys = z.subshift();
    let res = Resolution::new(f.range().saturating_sub(1).max(1))?;
    let (n, cap) = (3, 9);
    let whole = set_pressures(z, f, schedule)?;
    let alpha = if whole[0].value.is_finite() { whole[0].value } else { 0.0 };
    let cells: Vec<SymbolicSet> = (0..sys.alphabet_size() as u8).map(|b| z.restrict_to(&Word::new(vec![b]))).collect::<Result<_>>()?;

    let z_cover = cover_sum(z, n, alpha, res, f, cap)?.value;
    let z_pack = packing_sum(z, n, alpha, res, f, cap)?.value;
    let z_fixed = fixed_order_cover_sum(z, n, alpha, res, f)?;
    let mut cover_total = 0.0;
    let mut cell_est = Vec::new();
    for c in &cells {
        let cover = cover_sum(c, n, alpha, res, f, cap)?.value;
        cover_total += cover;
        let gap = rel_excess(cover, z_cover)
            .max(rel_excess(packing_sum(c, n, alpha, res, f, cap)?.value, z_pack))
            .max(rel_excess(fixed_order_cover_sum(c, n, alpha, res, f)?, z_fixed));
        s.sums_in_z.see(gap, at);
        let est = set_pressures(c, f, schedule)?;
        for (a, b) in est.iter().zip(&whole) {
            s.pressures_in_z.see(excess(a.bracket.0, b.bracket.1), at);
        }
        cell_est.push(est);
    }
    s.cover_subadditive.see(rel_excess(z_cover, cover_total), at);

    // probe the modified packing sum on both sides of the critical value
    for offset in [-0.1, 0.1] {
        let a = alpha + offset;
        let union = modified_packing_sum(z, a, res, f, 1, cap)?.lower;
        let parts: f64 = cells.iter().map(|c| modified_packing_sum(c, a, res, f, 1, cap).map(|m| m.upper)).sum::<Result<f64>>()?;
        let gap = if union == f64::INFINITY && parts == f64::INFINITY { 0.0 } else { rel_excess(union, parts) };
        s.modified_packing_subadditive.see(gap, at);
    }

    let both_ways = |i: usize| {
        let m = max_over(&cell_est, i);
        excess(whole[i].bracket.0, m.1).max(excess(m.0, whole[i].bracket.1))
    };
    s.bowen_union.see(both_ways(0), at);
    s.packing_union.see(both_ways(3), at);
    s.capacity_lower_union.see(excess(max_over(&cell_est, 1).0, whole[1].bracket.1), at);
    s.capacity_upper_union.see(excess(max_over(&cell_est, 2).0, whole[2].bracket.1), at);

    let c = ((seed % 17) as f64 - 8.0) / 8.0;
    let g = f.shifted(c);
    let gap = rel_gap(cover_sum(z, n, alpha + c, res, &g, cap)?.value, z_cover)
        .max(rel_gap(packing_sum(z, n, alpha + c, res, &g, cap)?.value, z_pack));
    s.shift_sums.see(gap, at);
    let shifted = set_pressures(z, &g, schedule)?;
    for (a, b) in shifted.iter().zip(&whole) {
        let gap = if b.value == f64::NEG_INFINITY && a.value == f64::NEG_INFINITY {
            0.0
        } else {
            (a.value - b.value - c).abs() - half_width(a) - half_width(b)
        };
        s.shift_pressures.see(gap, at);
    }

    let finer = Resolution::new(res.m() + 1)?;
    s.finer_m.see(rel_excess(z_fixed, fixed_order_cover_sum(z, n, alpha, finer, f)?), at);

    let full = Subshift::full(2)?;
    let mu = random_markov(seed, 2);
    let g = random_symbol_potential(seed, &full);
    let one = Resolution::new(1)?;
    let mut previous = f64::INFINITY;
    for delta in [0.1, 0.3, 0.6] {
        let v = katok_cover_sum(&mu, 4, 0.3, one, delta, &g, KatokMode::FixedOrder)?.value;
        s.smaller_delta.see(rel_excess(v, previous), at);
        previous = v;
    }

    let mut previous_words: Vec<Word> = Vec::new();
    let mut previous_log = f64::NEG_INFINITY;
    for eta in [0.02, 0.05, 0.1] {
        let spec = NeighborhoodSpec::new(1, eta, mu.clone())?;
        let words = generic_words(&full, &spec, 8)?;
        let lost = previous_words.iter().filter(|w| !words.contains(w)).count();
        let log_s = log_separated_pressure(&full, &spec, &g, 10, one, 100_000)?;
        let gap = if lost > 0 { f64::INFINITY } else { excess(previous_log, log_s).max(0.0) };
        s.larger_eta.see(gap, at);
        previous_words = words;
        previous_log = log_s;
    }
    Ok(())
}

/// Word-tree sums against exhaustive enumeration on small instances.
pub(super) fn engine_oracle(input: &SuiteInput, report: &mut SuiteReport) {
    let start = Instant::now();
    let mut cover = Worst::new();
    let mut packing = Worst::new();
    let mut fixed = Worst::new();
    let mut katok = Worst::new();
    for i in 0..200u64 {
        let c = small_instance(input.seed.wrapping_add(i));
        let result = (|| -> Result<()> {
            let e = cover_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap)?.value;
            cover.see(rel_gap(e, brute_force_cover_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap)?), || c.label.clone());
            let e = packing_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap)?.value;
            packing.see(rel_gap(e, brute_force_packing_sum(&c.z, c.n, c.alpha, c.res, &c.f, c.cap)?), || c.label.clone());
            let e = fixed_order_cover_sum(&c.z, c.n, c.alpha, c.res, &c.f)?;
            fixed.see(rel_gap(e, brute_force_fixed_order_sum(&c.z, c.n, c.alpha, c.res, &c.f)?), || c.label.clone());
            Ok(())
        })();
        if let Err(e) = result {
            report.failed(c.label, &e);
        }
    }
    let x = Subshift::full(2).unwrap();
    for i in 0..60u64 {
        let seed = input.seed.wrapping_add(i);
        let result = (|| -> Result<()> {
            let mu = small_rational_measure(seed);
            let f = BlockPotential::from_symbols(&x, &[0.1 * (seed % 7) as f64, -0.3])?;
            let m = 1 + (seed % 2) as usize;
            let n = (1 + (seed % 3) as usize).min(4 - m);
            let delta = [0.1, 0.25, 0.5, 0.8][(seed % 4) as usize];
            let res = Resolution::new(m)?;
            let e = katok_cover_sum(&mu, n, 0.2, res, delta, &f, KatokMode::FixedOrder)?.value;
            katok.see(rel_gap(e, brute_force_fixed_order_katok(&mu, &f, res, n, 0.2, delta)?), || format!("seed {seed}"));
            Ok(())
        })();
        if let Err(e) = result {
            report.failed(format!("katok seed {seed}"), &e);
        }
    }
    report.push(cover.check("cover sum vs enumeration (relative)", 1e-12));
    report.push(packing.check("packing sum vs enumeration (relative)", 1e-12));
    report.push(fixed.check("fixed-order sum vs enumeration (relative)", 1e-12));
    report.push(katok.check("fixed-order Katok sum vs enumeration (relative)", 1e-12));
    report.push(Check::at_most("seconds", start.elapsed().as_secs_f64(), 120.0));
}

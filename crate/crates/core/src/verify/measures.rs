use num_traits::ToPrimitive;

use super::{exact, half_width, measure_cases, Check, MeasureCase, SuiteInput, SuiteReport};
use crate::error::Result;
use crate::estimate::PressureEstimate;
use crate::generic::{generic_packing_check, generic_words, NeighborhoodSpec, RateSchedule};
use crate::measures::MarkovMeasure;
use crate::oracles::{binary_entropy, random_markov, random_symbol_potential, type_count};
use crate::pressures::{
    billingsley_check, caratheodory_measure_pressures, katok_measure_pressures, measure_local_pressures, measure_of_set, variational_scan,
    Direction, Family, MeasureSchedule, SampleBudget, ScanBudget, SetSchedule, VariationalTarget, HYPOTHESIS_RELAXED,
};
use crate::symbolic::{BlockPotential, Subshift, SymbolicSet, Word};

/// Default schedules with the resolutions lifted to m ≥ r.
fn measure_schedule(f: &BlockPotential) -> MeasureSchedule {
    let r = f.range();
    MeasureSchedule { m_list: vec![r, r + 1], ..MeasureSchedule::default() }
}

fn sample_budget(f: &BlockPotential, seed: u64) -> SampleBudget {
    let r = f.range();
    SampleBudget { m_list: vec![r, r + 1], seed, ..SampleBudget::default() }
}

struct Pressures {
    caratheodory: [PressureEstimate; 4],
    katok: [PressureEstimate; 4],
}

fn pressures(case: &MeasureCase) -> Result<Pressures> {
    let s = measure_schedule(&case.f);
    Ok(Pressures { caratheodory: caratheodory_measure_pressures(&case.mu, &case.f, &s)?, katok: katok_measure_pressures(&case.mu, &case.f, &s)? })
}

/// Every measure pressure against h_μ + ∫f dμ.
pub(super) fn identity_chain(input: &SuiteInput, report: &mut SuiteReport) -> Result<()> {
    let tol = input.tol_or(0.05);
    for case in measure_cases(input)? {
        let target = case.mu.free_energy(&case.f);
        let all = pressures(&case).and_then(|p| {
            let (lo, hi) = measure_local_pressures(&case.mu, &case.f, &sample_budget(&case.f, input.seed))?;
            Ok(p.caratheodory.into_iter().chain(p.katok).chain([lo, hi]).collect::<Vec<_>>())
        });
        match all {
            Ok(all) => {
                for e in &all {
                    report.push(Check::at_most(format!("{}: |{} - {target:.4}|", case.label, e.quantity.name()), (e.value - target).abs(), tol));
                }
                let flagged = all.iter().all(|e| e.flags.iter().any(|f| f == HYPOTHESIS_RELAXED));
                report.push(Check::holds(format!("{}: every estimate flagged {HYPOTHESIS_RELAXED}", case.label), flagged));
            }
            Err(e) => report.failed(&case.label, &e),
        }
    }
    Ok(())
}

/// Katok and Carathéodory versions agree; the Katok upper capacity never exceeds
/// the carrier one stage by stage.
pub(super) fn katok_equalities(input: &SuiteInput, report: &mut SuiteReport) -> Result<()> {
    let cap = input.tol_or(0.04);
    for case in measure_cases(input)? {
        let p = match pressures(&case) {
            Ok(p) => p,
            Err(e) => {
                report.failed(&case.label, &e);
                continue;
            }
        };
        for i in [0, 1, 3] {
            let (k, c) = (&p.katok[i], &p.caratheodory[i]);
            let limit = cap.min(half_width(k) + half_width(c));
            report.push(Check::at_most(format!("{}: |{} - {}|", case.label, k.quantity.name(), c.quantity.name()), (k.value - c.value).abs(), limit));
        }
        let (k, c) = (&p.katok[2], &p.caratheodory[2]);
        let mut worst = f64::NEG_INFINITY;
        let mut matched = 0;
        for ks in &k.stages {
            if let Some(cs) = c.stages.iter().find(|cs| cs.m == ks.m && cs.delta == ks.delta && cs.n == ks.n) {
                worst = worst.max(ks.value - cs.value);
                matched += 1;
            }
        }
        if matched == 0 {
            worst = f64::NAN;
        }
        report.push(Check::at_most(format!("{}: katok-capacity-upper - measure-capacity-upper, every stage", case.label), worst, 1e-9));
    }
    Ok(())
}

/// Integrated local pressures sit below the Katok pressures on random Markov measures.
pub(super) fn local_vs_katok(input: &SuiteInput, report: &mut SuiteReport) {
    let schedule = MeasureSchedule { m_list: vec![1], n_list: (8..=24).step_by(2).collect(), delta_list: vec![0.5, 0.25], ..MeasureSchedule::default() };
    let budget = SampleBudget { m_list: vec![1], orbits: 8, orbit_length: 2000, seed: input.seed };
    let cases: Vec<MeasureCase> = match input.document {
        Some(_) => match measure_cases(input) {
            Ok(c) => c,
            Err(e) => return report.failed("document measures", &e),
        },
        None => {
            let x = Subshift::full(2).unwrap();
            (0..20u64)
                .map(|i| {
                    let seed = input.seed.wrapping_add(i);
                    MeasureCase { label: format!("random markov seed {seed}"), sys: x.clone(), mu: random_markov(seed, 2), f: random_symbol_potential(seed, &x) }
                })
                .collect()
        }
    };
    for case in cases {
        let r = case.f.range();
        let schedule = MeasureSchedule { m_list: vec![r.max(1)], ..schedule.clone() };
        let budget = SampleBudget { m_list: vec![r.max(1)], ..budget.clone() };
        let result = katok_measure_pressures(&case.mu, &case.f, &schedule)
            .and_then(|k| measure_local_pressures(&case.mu, &case.f, &budget).map(|l| (k, l)));
        match result {
            Ok((k, (lo, hi))) => {
                let tol = input.tol.unwrap_or(half_width(&lo) + half_width(&k[0]));
                report.push(Check::at_most(format!("{}: local-lower - katok-bowen", case.label), lo.value - k[0].value, tol));
                let tol = input.tol.unwrap_or(half_width(&hi) + half_width(&k[3]));
                report.push(Check::at_most(format!("{}: local-upper - katok-packing", case.label), hi.value - k[3].value, tol));
            }
            Err(e) => report.failed(&case.label, &e),
        }
    }
}

/// Both directions on the whole space, and the lower direction on sets of positive measure.
pub(super) fn billingsley(input: &SuiteInput, report: &mut SuiteReport) -> Result<()> {
    let tol = input.tol_or(0.05);
    let schedule = SetSchedule::default();
    let mut runs: Vec<(String, SymbolicSet, MarkovMeasure, BlockPotential, bool)> = Vec::new();
    match input.document {
        Some(doc) => {
            for case in measure_cases(input)? {
                for (name, z) in &doc.sets {
                    if measure_of_set(z, &case.mu)?.1 > 0.0 {
                        runs.push((format!("{}, Z = {name}", case.label), z.clone(), case.mu.clone(), case.f.clone(), false));
                    }
                }
            }
        }
        None => {
            let x = Subshift::full(2)?;
            let cases = super::shipped_measure_cases();
            let (half, weighted) = (&cases[0], &cases[3]);
            runs.push(("bernoulli(1/2), f=0, Z = X".into(), SymbolicSet::whole(&x), half.mu.clone(), half.f.clone(), true));
            let zero = SymbolicSet::cylinders(&x, &[Word::parse("0")?])?;
            let split = SymbolicSet::cylinders(&x, &[Word::parse("01")?, Word::parse("11")?])?;
            runs.push((format!("{}, Z = [0]", half.label), zero.clone(), half.mu.clone(), half.f.clone(), false));
            runs.push((format!("{}, Z = [0]", weighted.label), zero, weighted.mu.clone(), weighted.f.clone(), false));
            runs.push((format!("{}, Z = [01] u [11]", weighted.label), split, weighted.mu.clone(), weighted.f.clone(), false));
        }
    }
    for (label, z, mu, f, both) in runs {
        let s = mu.free_energy(&f);
        let budget = SampleBudget { orbits: 8, ..sample_budget(&f, input.seed) };
        match billingsley_check(&z, &mu, &f, s, &budget, &schedule, tol) {
            Ok(v) => {
                report.push(Check::holds(format!("{label}: no direction contradicted at s = {s:.4}"), v.consistent()));
                if both {
                    let confirmed = v.directions.contains(&Direction::UpperBoundHolds) && v.directions.contains(&Direction::LowerBoundHolds);
                    report.push(Check::holds(format!("{label}: both directions confirmed at s = {s:.4}"), confirmed));
                }
                report.push(Check::at_most(
                    format!("{label}: estimated s {:.4} - P^P(Z) upper end", v.estimated_s),
                    v.estimated_s - v.packing.bracket.1,
                    tol,
                ));
            }
            Err(e) => report.failed(label, &e),
        }
    }
    Ok(())
}

/// Packing pressure of generic points, and exact type counts against entropy.
pub(super) fn generic_points(input: &SuiteInput, report: &mut SuiteReport) -> Result<()> {
    let tol = input.tol_or(0.06);
    let mut probabilities: Vec<f64> = Vec::new();
    for case in measure_cases(input)? {
        let k = if case.mu.is_iid() { 1 } else { 2 };
        match generic_packing_check(&case.sys, &case.mu, &case.f, k, &RateSchedule::default(), tol) {
            Ok(r) => {
                report.push(Check::at_most(format!("{}: |generic packing - {:.4}|", case.label, r.lower), (r.estimate.value - r.lower).abs(), tol));
            }
            Err(e) => report.failed(&case.label, &e),
        }
        if case.mu.is_iid() && case.mu.alphabet_size() == 2 {
            let p = case.mu.stationary()[1];
            if !probabilities.contains(&p) {
                probabilities.push(p);
            }
        }
    }
    let full = Subshift::full(2)?;
    for pf in probabilities {
        let mut worst = f64::NEG_INFINITY;
        let mut mismatch = 0;
        for n in 1..=30usize {
            let k = (pf * n as f64).round() as i64;
            let q = exact(k, n as i64);
            let count = type_count(&q, n, 0.0)?;
            let log_count = count.to_f64().unwrap_or(f64::INFINITY).ln();
            let bound = 2.0 * ((n + 1) as f64).ln() / n as f64;
            worst = worst.max((log_count / n as f64 - binary_entropy(k as f64 / n as f64)).abs() - bound);
            if n <= 12 {
                let reference = MarkovMeasure::bernoulli_exact(&[exact(1, 1) - q.clone(), q.clone()])?;
                let words = generic_words(&full, &NeighborhoodSpec::new(1, 0.0, reference)?, n)?;
                if num_bigint::BigUint::from(words.len()) != count {
                    mismatch += 1;
                }
            }
        }
        report.push(Check::at_most(format!("p = {pf}: |log(count)/n - H| - 2 log(n+1)/n, n <= 30"), worst, 0.0));
        report.push(Check::at_most(format!("p = {pf}: exact-type words vs binomial counts, n <= 12"), mismatch as f64, 0.0));
    }
    Ok(())
}

/// Measure pressures of family members against the set pressure of Z.
pub(super) fn variational(input: &SuiteInput, report: &mut SuiteReport, packing: bool) -> Result<()> {
    let tol = input.tol_or(0.04);
    let target = if packing { VariationalTarget::Packing } else { VariationalTarget::Bowen };
    let mut runs: Vec<(String, SymbolicSet, BlockPotential, Family)> = Vec::new();
    match input.document {
        Some(doc) => {
            let matrix = doc.subshift.matrix();
            let k = doc.subshift.alphabet_size();
            let family = if matrix.iter().flatten().all(|&e| e == 1) { Family::Bernoulli { alphabet: k } } else { Family::Markov { support: matrix } };
            runs.push((format!("{}, Z = X", doc.name), SymbolicSet::whole(&doc.subshift), doc.potential.clone(), family));
        }
        None => {
            let x = Subshift::full(2)?;
            let golden = vec![vec![1, 1], vec![1, 0]];
            let z = SymbolicSet::sub_shift(&x, &golden)?;
            let markov = Family::Markov { support: golden };
            runs.push(("full 2-shift, f(1)=1, bernoulli family".into(), SymbolicSet::whole(&x), BlockPotential::from_symbols(&x, &[0.0, 1.0])?, Family::Bernoulli { alphabet: 2 }));
            runs.push(("golden mean in the full shift, f=0, markov family".into(), z.clone(), BlockPotential::zero(&x), markov.clone()));
            runs.push(("golden mean in the full shift, f(1)=1/2, markov family".into(), z, BlockPotential::from_symbols(&x, &[0.0, 0.5])?, markov));
        }
    }
    let budget = ScanBudget { tolerance: tol, ..ScanBudget::default() };
    for (label, z, f, family) in runs {
        match variational_scan(&z, &f, &family, target, &budget) {
            Ok(r) => {
                report.push(Check::at_most(format!("{label}: largest member excess over the set pressure"), r.max_excess, tol));
                let skip = packing && r.hypothesis == Some(false);
                if skip {
                    report.notes.push(format!("{label}: P^P(Z) <= sup f, equality not asserted"));
                } else if r.transitive {
                    report.push(Check::at_most(format!("{label}: |set pressure - sup {:.4}|", r.sup_value), r.gap.abs(), tol));
                }
                report.notes.push(format!("{label}: sampled local pressure of the best member {:.4}", r.sampled_value));
            }
            Err(e) => report.failed(label, &e),
        }
    }
    Ok(())
}

use pressure_core::document::SystemDocument;
use pressure_core::engine::{BoundKind, StageSchedule};
use pressure_core::estimate::{PressureEstimate, Quantity};
use pressure_core::generic::{generic_packing_check, RateSchedule};
use pressure_core::measures::MarkovMeasure;
use pressure_core::oracles::transfer_pressure;
use pressure_core::pressures::{
    capacity_pressures, caratheodory_measure_pressures, katok_measure_pressures, measure_local_pressures, packing_pressure, pesin_pitskel_pressure,
    MeasureSchedule, SampleBudget, SetSchedule,
};
use pressure_core::report::{ResultFile, ResultRecord};
use pressure_core::symbolic::SymbolicSet;
use pressure_core::Error;

use crate::run_spec::RunSpec;

pub struct Run {
    pub file: ResultFile,
    /// Records whose bracket is wider than the tolerance or that could not be decided.
    pub inconclusive: Vec<String>,
}

const GENERIC_TOLERANCE: f64 = 0.06;

fn quantities(spec: &RunSpec) -> Result<Vec<Quantity>, Error> {
    if spec.quantity.is_empty() {
        return Ok(Quantity::SET.to_vec());
    }
    let mut out = Vec::new();
    for name in &spec.quantity {
        let q = Quantity::parse(name.trim()).ok_or_else(|| Error::Input(format!("unknown quantity {name:?}")))?;
        if !out.contains(&q) {
            out.push(q);
        }
    }
    Ok(out)
}

fn is_set_quantity(q: Quantity) -> bool {
    Quantity::SET.contains(&q)
}

fn set_schedule(spec: &RunSpec) -> SetSchedule {
    let mut s = SetSchedule::default();
    if let Some(m) = &spec.m_list {
        s.m_list = m.clone();
    }
    if let Some(n) = spec.n_max {
        s.stage.n_list = vec![n / 2, n];
    }
    if let Some(d) = spec.depth_cap {
        s.stage = StageSchedule { depth_cap: d, ..s.stage };
    }
    s
}

fn measure_schedule(spec: &RunSpec, range: usize) -> MeasureSchedule {
    let mut s = MeasureSchedule { m_list: vec![range, range + 1], ..MeasureSchedule::default() };
    if let Some(m) = &spec.m_list {
        s.m_list = m.clone();
    }
    if let Some(n) = spec.n_max {
        s.n_list = (n / 4..=n).step_by((n / 16).max(1)).collect();
    }
    if let Some(d) = &spec.delta_list {
        s.delta_list = d.clone();
    }
    s
}

/// The four set pressures of one set, each computed only if asked for.
fn set_records(z: &SymbolicSet, doc: &SystemDocument, wanted: &[Quantity], schedule: &SetSchedule) -> Result<Vec<PressureEstimate>, Error> {
    let f = &doc.potential;
    let capacity = if wanted.iter().any(|q| matches!(q, Quantity::CapacityLower | Quantity::CapacityUpper)) {
        Some(capacity_pressures(z, f, schedule)?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &q in wanted {
        out.push(match q {
            Quantity::Bowen => pesin_pitskel_pressure(z, f, schedule)?,
            Quantity::Packing => packing_pressure(z, f, schedule)?,
            Quantity::CapacityLower => capacity.as_ref().unwrap().0.clone(),
            Quantity::CapacityUpper => capacity.as_ref().unwrap().1.clone(),
            _ => continue,
        });
    }
    Ok(out)
}

fn measure_records(mu: &MarkovMeasure, doc: &SystemDocument, wanted: &[Quantity], spec: &RunSpec) -> Result<Vec<PressureEstimate>, Error> {
    let f = &doc.potential;
    let schedule = measure_schedule(spec, f.range());
    let any = |qs: &[Quantity]| wanted.iter().any(|q| qs.contains(q));
    let caratheodory = if any(&[Quantity::MeasureBowen, Quantity::MeasureCapacityLower, Quantity::MeasureCapacityUpper, Quantity::MeasurePacking]) {
        Some(caratheodory_measure_pressures(mu, f, &schedule)?)
    } else {
        None
    };
    let katok = if any(&[Quantity::KatokBowen, Quantity::KatokCapacityLower, Quantity::KatokCapacityUpper, Quantity::KatokPacking]) {
        Some(katok_measure_pressures(mu, f, &schedule)?)
    } else {
        None
    };
    let local = if any(&[Quantity::LocalLower, Quantity::LocalUpper]) {
        let budget = SampleBudget { m_list: schedule.m_list.clone(), seed: spec.seed.unwrap_or(0), ..SampleBudget::default() };
        Some(measure_local_pressures(mu, f, &budget)?)
    } else {
        None
    };
    let generic = if any(&[Quantity::GenericRate, Quantity::GenericPacking]) {
        let k = if mu.is_iid() { 1 } else { 2 };
        Some(generic_packing_check(&doc.subshift, mu, f, k, &RateSchedule::default(), spec.tol.unwrap_or(GENERIC_TOLERANCE))?)
    } else {
        None
    };
    let pick = |arr: &Option<[PressureEstimate; 4]>, q: Quantity| arr.as_ref().unwrap().iter().find(|e| e.quantity == q).unwrap().clone();
    let mut out = Vec::new();
    for &q in wanted {
        out.push(match q {
            Quantity::MeasureBowen | Quantity::MeasureCapacityLower | Quantity::MeasureCapacityUpper | Quantity::MeasurePacking => pick(&caratheodory, q),
            Quantity::KatokBowen | Quantity::KatokCapacityLower | Quantity::KatokCapacityUpper | Quantity::KatokPacking => pick(&katok, q),
            Quantity::LocalLower => local.as_ref().unwrap().0.clone(),
            Quantity::LocalUpper => local.as_ref().unwrap().1.clone(),
            Quantity::GenericRate => generic.as_ref().unwrap().rate.estimate.clone(),
            Quantity::GenericPacking => generic.as_ref().unwrap().estimate.clone(),
            _ => continue,
        });
    }
    Ok(out)
}

fn transfer_record(doc: &SystemDocument) -> Result<PressureEstimate, Error> {
    let t = transfer_pressure(&doc.subshift, &doc.potential)?;
    Ok(PressureEstimate {
        quantity: Quantity::Transfer,
        value: t.value,
        bracket: (t.lo, t.hi),
        epsilon_schedule: Vec::new(),
        n_schedule: Vec::new(),
        delta_schedule: Vec::new(),
        bound_kind: if t.hi - t.lo <= 1e-9 { BoundKind::Exact } else { BoundKind::Bracketed },
        provenance: "Perron root of the weighted block matrix".into(),
        flags: if t.reducible { vec!["reducible".into()] } else { Vec::new() },
        stages: Vec::new(),
    })
}

pub fn compute(spec: &RunSpec) -> Result<Run, Error> {
    let path = spec.system.as_ref().ok_or_else(|| Error::Input("--system is required".into()))?;
    let doc = SystemDocument::load(path)?;
    let wanted = quantities(spec)?;
    let mut records = Vec::new();
    let record = |set: Option<&str>, measure: Option<&str>, estimate| ResultRecord {
        system: doc.name.clone(),
        set: set.map(str::to_string),
        measure: measure.map(str::to_string),
        estimate,
    };

    if wanted.contains(&Quantity::Transfer) {
        records.push(record(None, None, transfer_record(&doc)?));
    }

    let set_wanted: Vec<Quantity> = wanted.iter().copied().filter(|&q| is_set_quantity(q)).collect();
    if !set_wanted.is_empty() {
        let whole;
        let sets: Vec<(&str, &SymbolicSet)> = if !spec.set.is_empty() {
            spec.set.iter().map(|n| Ok((n.as_str(), doc.set(n)?))).collect::<Result<_, Error>>()?
        } else if doc.sets.is_empty() {
            whole = SymbolicSet::whole(&doc.subshift);
            vec![("X", &whole)]
        } else {
            doc.sets.iter().map(|(n, z)| (n.as_str(), z)).collect()
        };
        let schedule = set_schedule(spec);
        for (name, z) in sets {
            for e in set_records(z, &doc, &set_wanted, &schedule)? {
                records.push(record(Some(name), None, e));
            }
        }
    }

    let measure_wanted: Vec<Quantity> = wanted.iter().copied().filter(|&q| !is_set_quantity(q) && q != Quantity::Transfer).collect();
    if !measure_wanted.is_empty() {
        let measures: Vec<(&str, &MarkovMeasure)> = if spec.measure.is_empty() {
            doc.measures.iter().map(|(n, m)| (n.as_str(), m)).collect()
        } else {
            spec.measure.iter().map(|n| Ok((n.as_str(), doc.measure(n)?))).collect::<Result<_, Error>>()?
        };
        if measures.is_empty() {
            return Err(Error::Input(format!("{}: measure quantities need a measure, and the document defines none", path.display())));
        }
        for (name, mu) in measures {
            for e in measure_records(mu, &doc, &measure_wanted, spec)? {
                records.push(record(None, Some(name), e));
            }
        }
    }

    let mut inconclusive = Vec::new();
    for r in &records {
        let what = format!("{} {}", r.set.as_deref().or(r.measure.as_deref()).unwrap_or(&r.system), r.estimate.quantity.name());
        if r.estimate.bound_kind == BoundKind::Inconclusive {
            inconclusive.push(format!("{what}: bound could not be decided"));
        } else if let Some(t) = spec.tol {
            if r.estimate.width() > 2.0 * t {
                inconclusive.push(format!("{what}: bracket width {:.4} exceeds 2 x {t}", r.estimate.width()));
            }
        }
    }
    Ok(Run { file: ResultFile { seed: spec.seed.unwrap_or(0), records }, inconclusive })
}

//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion. Built without the test harness so the lines always show.

use std::process::ExitCode;
use std::time::Instant;

use pressure_core::verify::{run_suite, SuiteInput, SuiteReport};

struct Criterion {
    id: &'static str,
    what: &'static str,
    suites: &'static [&'static str],
    /// Tolerance handed to the suites; `None` keeps the suite's own.
    tol: Option<f64>,
}

const CRITERIA: [Criterion; 9] = [
    Criterion { id: "AC1", what: "set pressures of the whole space match the transfer operator", suites: &["transfer"], tol: Some(0.03) },
    Criterion { id: "AC2", what: "every measure pressure equals the free energy", suites: &["identity-chain"], tol: Some(0.05) },
    Criterion { id: "AC3", what: "Katok and Caratheodory measure pressures agree", suites: &["katok-equalities"], tol: Some(0.04) },
    Criterion { id: "AC4", what: "local pressures sit between the Katok pressures", suites: &["local-vs-katok"], tol: None },
    Criterion { id: "AC5", what: "Billingsley-type comparisons", suites: &["billingsley"], tol: Some(0.05) },
    Criterion { id: "AC6", what: "generic points of Bernoulli and Markov measures", suites: &["generic-points"], tol: Some(0.06) },
    Criterion { id: "AC7", what: "variational principles for Bowen and packing pressure", suites: &["variational-bowen", "variational-packing"], tol: Some(0.04) },
    Criterion { id: "AC8", what: "engine sums match brute force", suites: &["engine-oracle"], tol: None },
    Criterion { id: "AC9", what: "structural properties of the set pressures", suites: &["structure", "chain"], tol: None },
];

fn run(c: &Criterion) -> Result<Vec<SuiteReport>, String> {
    c.suites
        .iter()
        .map(|s| run_suite(s, &SuiteInput { seed: 0, tol: c.tol, ..SuiteInput::default() }).map_err(|e| format!("{s}: {e}")))
        .collect()
}

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let reports = run(c);
        let secs = start.elapsed().as_secs_f64();
        match reports {
            Ok(reports) => {
                let total: usize = reports.iter().map(|r| r.checks.len()).sum();
                let bad: Vec<_> = reports.iter().flat_map(|r| r.failures().map(move |f| (r.suite.as_str(), f))).collect();
                let ok = bad.is_empty() && reports.iter().all(SuiteReport::passed);
                println!("{} {}  {}  ({} of {} checks, {:.1}s)", c.id, if ok { "PASS" } else { "FAIL" }, c.what, total - bad.len(), total, secs);
                for (suite, f) in &bad {
                    println!("    {suite}: gap={:.3e} limit={:.3e}  {}", f.gap, f.limit, f.name);
                }
                if !ok {
                    failed += 1;
                }
            }
            Err(e) => {
                println!("{} FAIL  {}  ({e})", c.id, c.what);
                failed += 1;
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}

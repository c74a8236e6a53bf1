//! Acceptance suite: one PASS/FAIL line per criterion. Tolerances live in
//! `rmnest_core::verify::tol`.

use rmnest_core::verify::{name, run_criterion, CRITERIA};
use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for id in 1..=CRITERIA {
        let start = Instant::now();
        let (pass, detail) = match run_criterion(id) {
            Ok(r) => (r.pass, r.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} ({}): {verdict} [{:.1}s] {detail}",
            name(id),
            start.elapsed().as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {CRITERIA}/{CRITERIA} criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}

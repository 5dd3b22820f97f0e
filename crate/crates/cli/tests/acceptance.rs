//! Acceptance suite: one PASS/FAIL line per criterion.

use siegel_cli::reproduce::{run_one, DEFAULT_SEED, ITEMS};

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (name, criterion) in ITEMS {
        let outcome = run_one(name, criterion, DEFAULT_SEED);
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {criterion} ({name}, {:.1}s): {}", outcome.seconds, outcome.detail);
        if !outcome.pass {
            failed.push(criterion);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}

//! Runs every acceptance criterion at the default seed and prints one line per criterion.

use std::process::ExitCode;

use stretchperc::suite::{fingerprint, run_criterion, Outcome, DEFAULT_SEED};

fn main() -> ExitCode {
    let mut outcomes: Vec<Outcome> = Vec::new();
    let mut lines = Vec::new();
    for id in 1..=10 {
        let o = run_criterion(id, DEFAULT_SEED).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
        println!("{}", o.line());
        lines.push(o.line());
        outcomes.push(o);
    }

    let rerun: Vec<Outcome> = (1..=10)
        .map(|id| run_criterion(id, DEFAULT_SEED).unwrap())
        .collect();
    let same = fingerprint(&outcomes) == fingerprint(&rerun);
    let line = format!(
        "criterion 11 determinism: {} (reran criteria 1-10)",
        if same { "PASS" } else { "FAIL" }
    );
    println!("{line}");
    lines.push(line);

    let failed = lines.iter().filter(|l| l.contains(": FAIL")).count();
    println!("acceptance: {} of {} criteria passed", lines.len() - failed, lines.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Acceptance suite: runs every numbered criterion and prints one line each.
//!
//! Runs without the libtest harness so the lines are never captured; the
//! process fails if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use tf2d_core::verify::{run_all, VerifyConfig};

fn main() -> ExitCode {
    let start = Instant::now();
    let report = match run_all(&VerifyConfig::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("acceptance suite could not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!("\nrunning {} acceptance criteria", report.criteria.len());
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed = report.criteria.iter().filter(|c| !c.passed).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s\n",
        report.criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

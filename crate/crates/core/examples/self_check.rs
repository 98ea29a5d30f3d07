//! Run the consistency suites with a small configuration.

use recycled_mzi::verify::{run_checks, VerifyConfig};

fn main() {
    let config = VerifyConfig {
        points: 200,
        grid: 30,
        ..VerifyConfig::default()
    };
    for check in run_checks(&config) {
        println!(
            "{:<28} {:>10.3e}  (tol {:.0e}, {} samples) {}",
            check.check,
            check.max_deviation,
            check.tolerance,
            check.samples,
            if check.pass { "ok" } else { "FAILED" }
        );
    }
}

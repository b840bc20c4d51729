//! Run the randomized oracle suite directly (the `pathinv selftest`
//! subcommand wraps the same harness).
//!
//! ```bash
//! cargo run --release --example selftest_harness
//! ```

use pathinv::oracle::property_harness;

fn main() {
    let summary = property_harness(42, 10);
    for o in &summary.outcomes {
        println!(
            "[{}] {:<38} worst {:>10.3e}  tol {:>8.1e}",
            if o.passed { "pass" } else { "FAIL" },
            o.name,
            o.worst,
            o.tolerance
        );
    }
    println!(
        "\nseed {} size {}: {}",
        summary.seed,
        summary.corpus_size,
        if summary.all_passed() { "all properties hold" } else { "FAILURES" }
    );
    std::process::exit(if summary.all_passed() { 0 } else { 1 });
}

//! Flatness verdicts across structure classes: curvature maxima, the
//! invariant, and membership in the Q1-kernel family.
//!
//! ```bash
//! cargo run --release --example flatness_check
//! ```

use pathinv::expr::{evaluate_on_grid, parse, Chart, PeriodicityCheck};
use pathinv::field::GridSpec;
use pathinv::ode::{flatness_report, OdeTorusStructure};

fn main() {
    let grid = GridSpec::new(32, 32, 64).expect("even grid");
    for src in ["0", "0.7*cos(3*alpha)", "cos(2*alpha)", "0.4*cos(2*pi*x)*sin(alpha)"] {
        let ast = parse(src, Chart::Torus).expect("expression");
        let field = evaluate_on_grid(&ast, grid, PeriodicityCheck::Warn)
            .expect("grid eval")
            .field;
        let rep = flatness_report(&OdeTorusStructure::new(field), 1e-9).expect("resolved");
        println!("F = {src}");
        println!(
            "  max|Q1| = {:.3e}  max|Q2| = {:.3e}  mu = {:+.6e}",
            rep.max_q1, rep.max_q2, rep.mu
        );
        println!(
            "  q1-flat: {}  q2-flat: {}  flat: {}  kernel residual = {:.3e}",
            rep.q1_flat, rep.q2_flat, rep.flat, rep.kernel_residual
        );
    }
}

//! Point-equivalence invariants in the slope chart y'' = G(x, y, p), and
//! the conversion from torus structure functions: Q1 vanishes exactly on
//! the cubics in p, which is where the alpha-chart kernel family lands.
//!
//! ```bash
//! cargo run --release --example p_chart_invariants
//! ```

use pathinv::charts::{alpha_to_p, max_abs_on_box, q1_p, q2_p, PBox, PChartOde};
use pathinv::expr::{parse, Chart};
use pathinv::field::{GridSpec, PeriodicScalarField};

fn main() {
    let boxx = PBox { np: 65, nx: 8, ny: 8, ..PBox::default() };

    // polynomial charts: analytic fourth derivative
    for src in ["p^3-2*p", "p^4", "y^2", "x*p^2+y"] {
        let ast = parse(src, Chart::PChart).expect("expression");
        let ode = PChartOde::from_expr(ast, boxx);
        let q1 = q1_p(&ode, 0.3, 0.7, 1.5).expect("in box");
        let q2 = q2_p(&ode, 0.3, 0.7, 1.5).expect("in box");
        println!("G = {src:<12} Q1(0.3, 0.7, 1.5) = {q1:+.6e}   Q2 = {q2:+.6e}");
    }

    // chart conversion: kernel members map to cubics
    let spec = GridSpec::new(16, 16, 64).expect("grid");
    for (label, f) in [
        ("cos(a) + 0.5 sin(3a) (kernel)", PeriodicScalarField::from_fn(spec, |_, _, a| {
            a.cos() + 0.5 * (3.0 * a).sin()
        })),
        ("cos(2a) (not kernel)", PeriodicScalarField::from_fn(spec, |_, _, a| (2.0 * a).cos())),
    ] {
        let chart = alpha_to_p(&f, boxx);
        let worst = max_abs_on_box(&chart, q1_p).expect("sampled");
        println!("F = {label:<32} max |Q1| on p-box = {worst:.3e}");
    }
}

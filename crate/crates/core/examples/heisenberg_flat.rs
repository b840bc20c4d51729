// The flat Heisenberg baseline: every torsion and curvature coefficient
// vanishes and the global invariant is zero.
//
//   cargo run --release --example heisenberg_flat

use pathinv::families::heisenberg_model;

pub fn run_example() {
    let rep = heisenberg_model();
    println!("tau12 = {}, tau21 = {}", rep.data.tau12, rep.data.tau21);
    println!("Q1 = {}, Q2 = {}", rep.q1, rep.q2);
    println!("mu  = {}", rep.mu_analytic);
    println!("flat: {}", rep.flat);
}

#[allow(dead_code)]
fn main() {
    run_example();
}

// The expression language: parsing, evaluation on the periodic grid, and
// positioned error reporting.
//
//   cargo run --release --example expression_language

use pathinv::expr::{evaluate_on_grid, parse, Chart, PeriodicityCheck};
use pathinv::field::GridSpec;

pub fn run_example() {
    let grid = GridSpec::new(8, 8, 16).expect("even grid");

    let src = "0.3*sin(alpha)+0.1*cos(2*pi*x)*sin(3*alpha)";
    let ast = parse(src, Chart::Torus).expect("valid source");
    println!("source : {src}");
    println!("printed: {ast}");
    println!("depth  : {}", ast.depth());
    let eval = evaluate_on_grid(&ast, grid, PeriodicityCheck::Warn).expect("grid eval");
    println!("max |F| on grid = {:.6}", eval.field.max_abs());

    // precedence: ^ binds above unary minus, right associative
    for src in ["2^3^2", "-2^2", "2^-1"] {
        let v = parse(src, Chart::Torus).unwrap().eval(0.0, 0.0, 0.0).unwrap();
        println!("{src:<6} = {v}");
    }

    // errors carry byte offsets
    for bad in ["sin(", "2x", "foo(3)", "p"] {
        match parse(bad, Chart::Torus) {
            Err(e) => println!("`{bad}` -> {e}"),
            Ok(_) => println!("`{bad}` unexpectedly parsed"),
        }
    }

    // wrap-around continuity check flags non-periodic input
    let bad = parse("x", Chart::Torus).unwrap();
    let eval = evaluate_on_grid(&bad, grid, PeriodicityCheck::Warn).expect("warn mode");
    for w in &eval.warnings {
        println!("warning: {w}");
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}

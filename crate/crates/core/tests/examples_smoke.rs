//! Keep the cheap examples compiling and running under `cargo test`.

mod heisenberg_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/heisenberg_flat.rs"));
}

mod expression_example {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/expression_language.rs"));
}

#[test]
fn heisenberg_example_runs() {
    heisenberg_example::run_example();
}

#[test]
fn expression_example_runs() {
    expression_example::run_example();
}

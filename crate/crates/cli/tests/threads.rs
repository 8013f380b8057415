//! Separate binary: the variable is process-wide.

use setint_cli::run;

#[test]
fn thread_cap_is_validated() {
    let args = [
        "setint",
        "counterexample",
        "hilbert",
        "--partition",
        "uniform:4",
    ];
    std::env::set_var("SETINT_THREADS", "zero");
    assert_eq!(run(args), 64);
    std::env::set_var("SETINT_THREADS", "1");
    assert_eq!(run(args), 0);
    std::env::remove_var("SETINT_THREADS");
}

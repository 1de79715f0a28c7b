use transversal_lab::{run, EXIT_INVALID, EXIT_OK, THREADS_ENV};

fn code(args: &[&str]) -> i32 {
    let argv = std::iter::once("transversal-lab").chain(args.iter().copied());
    run(argv, &mut "".as_bytes(), &mut Vec::new(), &mut Vec::new())
}

// One test per binary: the variable is process-wide.
#[test]
fn thread_cap_is_validated_and_applied() {
    std::env::set_var(THREADS_ENV, "zero");
    assert_eq!(code(&["gen", "discs", "--n", "3"]), EXIT_INVALID);
    std::env::set_var(THREADS_ENV, "2");
    assert_eq!(code(&["gen", "discs", "--n", "3"]), EXIT_OK);
    assert_eq!(rayon::current_num_threads(), 2);
}

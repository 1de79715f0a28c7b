use std::io::{self, Write};

fn main() {
    let stdin = io::stdin();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = transversal_lab::run(std::env::args_os(), &mut stdin.lock(), &mut out, &mut err);
    out.flush().ok();
    std::process::exit(code);
}

use std::process::ExitCode;

fn main() -> ExitCode {
    hcsolve::cli::main()
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ou_hyper::cli::main_entry()
}

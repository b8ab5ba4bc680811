use std::process::ExitCode;

fn main() -> ExitCode {
    nrvad::cli::main_with_args(std::env::args_os())
}

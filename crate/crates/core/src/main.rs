use std::process::ExitCode;

fn main() -> ExitCode {
    qcnoise::cli::main_with_args(std::env::args_os())
}

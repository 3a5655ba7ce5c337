use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cotunnel::cli::run(std::env::args_os()))
}

use std::process::ExitCode;

fn main() -> ExitCode {
    lyapunov_lab_cli::cli::run_from_args(std::env::args_os())
}

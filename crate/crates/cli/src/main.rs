use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cdaesep_cli::run_cli(std::env::args_os()))
}

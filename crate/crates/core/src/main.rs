use std::process::ExitCode;

fn main() -> ExitCode {
    ccp_voids::cli::run(std::env::args_os())
}

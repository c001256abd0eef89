use std::process::ExitCode;

fn main() -> ExitCode {
    mst_core::cli::run(std::env::args_os())
}

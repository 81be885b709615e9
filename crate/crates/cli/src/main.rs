use std::process::ExitCode;

fn main() -> ExitCode {
    basenp_cli::run(std::env::args_os())
}

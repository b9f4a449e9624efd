use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(sgl::cli::run(std::env::args_os()))
}

use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let outcome = bitwist::cli::run_command(args);
    print!("{}", outcome.output);
    ExitCode::from(outcome.code as u8)
}

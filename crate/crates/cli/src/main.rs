use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = haarwords_cli::run(std::env::args_os());
    // Each stream is written once, after the command has finished.
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.status)
}

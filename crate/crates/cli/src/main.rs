use std::process::ExitCode;

fn main() -> ExitCode {
    let status = fqre_cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(status as u8)
}

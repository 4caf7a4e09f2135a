use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let result = bvlab_cli::run(std::env::args_os());
    if let Err(e) = result.write_artifacts() {
        eprintln!("error: cannot write certificate: {e}");
        return ExitCode::from(2);
    }
    print!("{}", result.stdout);
    eprint!("{}", result.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(result.exit_code as u8)
}

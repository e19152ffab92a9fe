use std::process::ExitCode;

use holonomy_zeta::cli::run_cli;

fn main() -> ExitCode {
    let out = run_cli(std::env::args_os());
    for line in &out.stderr {
        eprintln!("{line}");
    }
    println!("{}", out.stdout);
    ExitCode::from(out.exit_code as u8)
}

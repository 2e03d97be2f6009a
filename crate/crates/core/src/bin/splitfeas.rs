use std::process::ExitCode;

fn main() -> ExitCode {
    let result = splitfeas::cli::run_cli(std::env::args_os());
    if result.exit_code == 0 {
        print!("{}", result.summary);
    } else {
        eprint!("{}", result.summary);
        if !result.summary.ends_with('\n') {
            eprintln!();
        }
    }
    ExitCode::from(result.exit_code as u8)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        eprintln!("{}", cmk::cli::USAGE);
        return ExitCode::from(if args.is_empty() { 1 } else { 0 });
    }
    ExitCode::from(cmk::cli::run(&args) as u8)
}

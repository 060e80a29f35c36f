use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let (code, out) = tuplix::cli::run(args);
    print!("{}", out);
    ExitCode::from(code)
}

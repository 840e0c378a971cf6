use std::process::ExitCode;

use fou_tool::error::CliError;

fn main() -> ExitCode {
    let cfg = match fou_tool::args::parse_args(std::env::args_os()) {
        Ok(Ok(cfg)) => cfg,
        Ok(Err(e)) => return fail(e),
        Err(e) => e.exit(),
    };
    let threads = std::env::var("FOU_THREADS").ok();
    if let Err(e) = fou_tool::init_threads(threads.as_deref()) {
        return fail(e);
    }
    eprintln!("fou: {cfg}");
    match fou_tool::run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("fou: {e}");
    ExitCode::from(e.exit_code() as u8)
}

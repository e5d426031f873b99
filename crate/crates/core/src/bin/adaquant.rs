use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = adaquant::cli::Cli::parse();
    match adaquant::cli::run(&cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

use clap::Parser;

fn main() {
    let cli = wpbayes::cli::Cli::parse();
    if let Err(err) = wpbayes::cli::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(wpbayes::cli::exit_code(&err));
    }
}

use clap::Parser;

fn main() {
    let cli = demex_cli::Cli::parse();
    if let Err(error) = demex_cli::run(cli) {
        eprintln!("error: {error}");
        std::process::exit(error.exit_code());
    }
}

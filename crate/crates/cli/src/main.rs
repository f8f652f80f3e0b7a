use clap::Parser;

fn main() {
    std::process::exit(qforce_cli::run(qforce_cli::Cli::parse()));
}

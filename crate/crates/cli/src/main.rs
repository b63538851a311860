use clap::Parser;

fn main() {
    let cli = rim_cli::Cli::parse();
    std::process::exit(rim_cli::run(&cli));
}

use clap::Parser;

fn main() {
    let cli = komatsu::cli::Cli::parse();
    std::process::exit(komatsu::cli::run(&cli));
}

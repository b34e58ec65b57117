use clap::Parser;

fn main() {
    let cli = sdplift::cli::Cli::parse();
    std::process::exit(sdplift::cli::run(&cli));
}

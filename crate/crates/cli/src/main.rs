use clap::Parser;

fn main() {
    let cli = carnot_cli::Cli::parse();
    std::process::exit(carnot_cli::execute(&cli));
}

use clap::Parser;

fn main() {
    let cli = tavis_cli::Cli::parse();
    if let Err(e) = tavis_cli::run(&cli) {
        eprintln!("tavis: {e}");
        std::process::exit(e.exit_code());
    }
}

use clap::Parser;

use pathint_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(err) = execute(cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}

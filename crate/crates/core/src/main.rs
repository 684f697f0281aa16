use clap::Parser;

use tecsoe::cli::{run, Args};

fn main() {
    let args = Args::parse();
    match run(&args) {
        Ok(outcome) => print!("{}", outcome.stdout),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}

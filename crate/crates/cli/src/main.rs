use clap::Parser;
use std::io::Write;

fn main() {
    let cli = nrcq::Cli::parse();
    let out = nrcq::run_cli(&cli);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(out.code);
}

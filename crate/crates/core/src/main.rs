use clap::Parser;
use dslab::cli::{execute, Cli, SEED_ENV};

fn main() {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    std::process::exit(execute(&cli, env_seed.as_deref()));
}

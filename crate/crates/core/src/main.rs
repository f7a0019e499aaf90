use clap::Parser;

use homoclinic::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}

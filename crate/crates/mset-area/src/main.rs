use clap::Parser;

use mset_area::cli::{dispatch, RunConfig};

fn main() {
    let config = RunConfig::parse();
    std::process::exit(dispatch(&config));
}

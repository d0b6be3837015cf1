use std::io;

use clap::Parser;
use evalstat::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let status = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(status);
}

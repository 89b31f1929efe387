use clap::Parser;

use sftkit::cli::{run, Args};

fn main() {
    let args = Args::parse();
    let (report, code) = run(&args.command);
    if code == 2 {
        eprint!("{report}");
    } else {
        print!("{report}");
    }
    std::process::exit(code);
}

mod args;
mod run;
mod svg;

use args::{Cli, Command};
use clap::Parser;
use std::io::Write;

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plaus(a) => run::plaus(a),
        Command::Interval(a) => run::interval(a),
        Command::Pit(s) => run::pit(s),
        Command::Coverage(s) => run::coverage(s),
        Command::Datasets(d) => run::datasets(d),
    };
    let out = match result {
        Ok(s) => s,
        Err(e) => {
            eprintln!("impred: {e}");
            std::process::exit(e.exit_code());
        }
    };
    let written = match run::common(&cli.command).and_then(|c| c.output.as_ref()) {
        Some(path) => std::fs::write(path, out.as_bytes()),
        None => std::io::stdout().lock().write_all(out.as_bytes()),
    };
    if let Err(e) = written {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("impred: {e}");
            std::process::exit(1);
        }
    }
}

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hopfseg_cli::run::{execute, schema_failure, Command, Outcome, Settings};
use hopfseg_cli::spec::parse_spec;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Check,
    Reconstruct,
    Trace,
    Index,
    Desingularize,
    Simulate,
    Render,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Check => Command::Check,
            Cmd::Reconstruct => Command::Reconstruct,
            Cmd::Trace => Command::Trace,
            Cmd::Index => Command::Index,
            Cmd::Desingularize => Command::Desingularize,
            Cmd::Simulate => Command::Simulate,
            Cmd::Render => Command::Render,
        }
    }
}

/// Segregated states from Hopf differentials on the unit disk.
#[derive(Debug, Parser)]
#[command(name = "hopfseg", version)]
struct Args {
    command: Cmd,
    /// Function spec (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Directory for report.json and artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Admissibility tolerance relative to the boundary scale.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Competition rate for `simulate`.
    #[arg(long, default_value_t = 1e4)]
    mu: f64,
    /// Closeness target (budget with --all).
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    branch: u32,
    /// Boundary samples per species for `simulate`.
    #[arg(long, default_value_t = 1024)]
    samples: usize,
    /// Reduce every multiple critical zero to simple ones.
    #[arg(long)]
    all: bool,
}

fn write_outputs(dir: &PathBuf, outcome: &Outcome) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), outcome.report_text())?;
    for (name, contents) in &outcome.artifacts {
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = Command::from(args.command);
    let settings = Settings {
        resolution: args.resolution,
        tol: args.tol,
        mu: args.mu,
        eps: args.eps,
        branch: args.branch,
        samples: args.samples,
        reduce: args.all,
        ..Settings::default()
    };
    let text = match fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("hopfseg: cannot read {}: {e}", args.input.display());
            return ExitCode::from(2);
        }
    };
    let (outcome, code) = match parse_spec(&text) {
        Ok(spec) => {
            let o = execute(command, &spec, &settings);
            let code = o.exit_code();
            (o, code)
        }
        Err(e) => (schema_failure(command, &settings, &e), 2),
    };
    print!("{}", outcome.report_text());
    if let Err(e) = write_outputs(&args.out, &outcome) {
        eprintln!("hopfseg: cannot write to {}: {e}", args.out.display());
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}

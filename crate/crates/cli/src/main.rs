// `!(x <= limit)` is used on purpose so that NaN fails the gate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod experiments;
mod output;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ConfigFile, Experiment};
use experiments::Failure;
use output::Output;
use twistlab::exec::{set_execution, Execution};

const DEFAULT_OUT: &str = "twistlab-out";

struct Resolved {
    experiment: Experiment,
    seed: u64,
    out: PathBuf,
    threads: Option<usize>,
}

fn resolve(cli: Cli) -> Result<Resolved, Failure> {
    let (experiment, file) = match cli.command {
        Command::Spectrum(a) => (Experiment::Spectrum(a), ConfigFile::default()),
        Command::Traces(a) => (Experiment::Traces(a), ConfigFile::default()),
        Command::Pressure(a) => (Experiment::Pressure(a), ConfigFile::default()),
        Command::Ensemble(a) => (Experiment::Ensemble(a), ConfigFile::default()),
        Command::Correlate(a) => (Experiment::Correlate(a), ConfigFile::default()),
        Command::Average(a) => (Experiment::Average(a), ConfigFile::default()),
        Command::Thresholds(a) => (Experiment::Thresholds(a), ConfigFile::default()),
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Failure::Config(format!("cannot read config {}: {e}", config.display()))
            })?;
            let file = ConfigFile::parse(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            let experiment = file
                .experiment()
                .map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
            (experiment, file)
        }
    };
    // command line flags win over the config file
    Ok(Resolved {
        experiment,
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out: cli.out.or(file.out).unwrap_or_else(|| DEFAULT_OUT.into()),
        threads: cli.threads.or(file.threads),
    })
}

fn execute(r: &Resolved) -> Result<String, Failure> {
    if let Some(n) = r.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Other(e.to_string()))?;
        if n == 1 {
            set_execution(Execution::Sequential);
        }
    }
    let mut out = Output::new(&r.out, &r.experiment, r.seed)?;
    experiments::run(&r.experiment, r.seed, &mut out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = resolve(cli).and_then(|r| execute(&r));
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let kind = match f {
                Failure::Config(_) => "config error",
                Failure::Gate(_) => "numerical gate failed",
                Failure::Other(_) => "error",
            };
            eprintln!("twistlab: {kind}: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}

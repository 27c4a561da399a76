use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trppm::experiment::sweep::{sweep_exit_code, write_summary_csv};
use trppm::experiment::{
    parse_config, run_experiment, seed_override, sweep, verify_suite, ExperimentConfig, Suite,
    EXIT_CONFIG,
};

/// Trust-region proximal point experiments.
#[derive(Parser)]
#[command(name = "trppm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and check its trace.
    Run {
        /// Experiment configuration (TOML).
        config: PathBuf,
    },
    /// Run an experiment once per value of a numeric configuration key.
    Sweep {
        config: PathBuf,
        /// Dotted key, e.g. `solver.t`.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty.
        #[arg(long, value_parser = parse_values, default_value = "")]
        values: Values,
        /// Summary CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a seeded property suite.
    Verify {
        /// operators, displacement, rates, equivalence or all.
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone)]
struct Values(Vec<f64>);

fn parse_values(s: &str) -> Result<Values, String> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Values)
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, i32> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    let mut cfg = parse_config(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        EXIT_CONFIG
    })?;
    if let Some(seed) = seed_override() {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match run_experiment(&cfg) {
                Ok(out) => {
                    if let Some(t) = &out.trace {
                        println!(
                            "terminated: {} after {} iterations",
                            t.terminated.as_str(),
                            t.iterations()
                        );
                    }
                    print!("{}", out.report.summary());
                    out.exit_code()
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let rows = match sweep(&cfg, &axis, &values.0) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let written = match &out {
                Some(path) => File::create(path).and_then(|f| {
                    let mut w = BufWriter::new(f);
                    write_summary_csv(&axis, &rows, &mut w)?;
                    w.flush()
                }),
                None => write_summary_csv(&axis, &rows, &mut io::stdout().lock()),
            };
            if let Err(e) = written {
                let target = out
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "stdout".into());
                eprintln!("error: {target}: {e}");
                return EXIT_CONFIG;
            }
            sweep_exit_code(&rows)
        }
        Command::Verify { suite, seed } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let report = verify_suite(suite, seed_override().unwrap_or(seed));
            print!("{}", report.summary());
            if report.passed {
                0
            } else {
                1
            }
        }
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(code as u8)
}

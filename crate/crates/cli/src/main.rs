use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynmis::error::RunError;
use dynmis::runner::{run_stream, simulate_stream, Algo, RunOptions, RunReport};
use dynmis::stream::{parse_stream, render_stream};
use dynmis::workload::{adversary_stream, random_stream, RandomStreamConfig};
use dynmis::Stream;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_AUDIT: u8 = 3;

#[derive(Parser)]
#[command(name = "dynmis", version, about = "Fully dynamic maximal independent set")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an update stream.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Replay a stream on a sequential engine.
    Run {
        stream: PathBuf,
        #[arg(long, value_enum, default_value_t = AlgoArg::Sublinear)]
        algo: AlgoArg,
        /// Declared maximum degree; insertions exceeding it are rejected.
        #[arg(long)]
        delta_bound: Option<u64>,
        /// Audit the MIS and all counters after every update.
        #[arg(long)]
        verify: bool,
        /// Print one record per update after the summary.
        #[arg(long)]
        per_update: bool,
    },
    /// Replay a stream in the message-passing simulator.
    Simulate {
        stream: PathBuf,
        #[arg(long)]
        verify: bool,
        #[arg(long)]
        per_update: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random insertions and deletions.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability that a step inserts an edge.
        #[arg(long, default_value_t = 0.5)]
        insert_bias: f64,
        /// Probability that a step is a vertex update instead.
        #[arg(long, default_value_t = 0.0)]
        vertex_rate: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stream whose last insertion forces n/4 MIS changes.
    Adversary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum AlgoArg {
    Delta,
    Sublinear,
    Auto,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Delta => Algo::Delta,
            AlgoArg::Sublinear => Algo::Sublinear,
            AlgoArg::Auto => Algo::Auto,
        }
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn write_out(out: Option<PathBuf>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(p) => fs::write(&p, text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| fail(EXIT_INPUT, e)),
    }
}

fn load(path: &PathBuf) -> Result<Stream, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_stream(&text).map_err(|e| fail(EXIT_INPUT, format!("{}: {e}", path.display())))
}

fn report(result: Result<RunReport, RunError>, per_update: bool) -> ExitCode {
    match result {
        Ok(r) => {
            let mut text = r.render_summary();
            if per_update {
                text.push_str(&r.render_updates());
            }
            match io::stdout().write_all(text.as_bytes()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(EXIT_INPUT, e),
            }
        }
        Err(RunError::Audit { index, findings }) => {
            eprintln!("error: audit failed after update {index}");
            for f in &findings {
                eprintln!("  {f}");
            }
            ExitCode::from(EXIT_AUDIT)
        }
        Err(e) => fail(EXIT_INPUT, e),
    }
}

fn execute(cmd: Command) -> Result<ExitCode, ExitCode> {
    match cmd {
        Command::Gen { kind } => {
            let (stream, out) = match kind {
                GenKind::Random {
                    n,
                    steps,
                    seed,
                    insert_bias,
                    vertex_rate,
                    out,
                } => {
                    let cfg = RandomStreamConfig {
                        insert_bias,
                        vertex_rate,
                        ..RandomStreamConfig::new(n, steps, seed)
                    };
                    (random_stream(&cfg).map_err(|e| fail(EXIT_USAGE, e))?, out)
                }
                GenKind::Adversary { n, out } => {
                    (adversary_stream(n).map_err(|e| fail(EXIT_USAGE, e))?, out)
                }
            };
            write_out(out, &render_stream(&stream))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            stream,
            algo,
            delta_bound,
            verify,
            per_update,
        } => {
            let s = load(&stream)?;
            let opts = RunOptions {
                algo: algo.into(),
                delta_bound,
                verify,
            };
            Ok(report(run_stream(&s, &opts), per_update))
        }
        Command::Simulate {
            stream,
            verify,
            per_update,
        } => {
            let s = load(&stream)?;
            Ok(report(simulate_stream(&s, verify), per_update))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    execute(cli.cmd).unwrap_or_else(|code| code)
}

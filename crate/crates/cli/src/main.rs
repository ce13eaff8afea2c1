use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lerw_cli::commands::{self, VerifyOptions};
use lerw_cli::report::print_json;
use lerw_cli::{VerificationReport, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use lerw_core::rational::parse_rational;
use lerw_core::WeightedGraph;

#[derive(Parser)]
#[command(name = "lerw", version, about = "Exact checks of spin-system representations of loop-erased random walk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every exact identity on a graph file.
    Verify {
        graph: PathBuf,
        /// Truncation degree for the heap series identities.
        #[arg(long, default_value_t = 8)]
        degree: usize,
        /// Verify only this many triples, chosen from the seed.
        #[arg(long)]
        triples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Boundary-killing limit on a lattice ball.
    Limit {
        #[arg(long = "d")]
        dimension: usize,
        #[arg(long)]
        radius: u32,
        /// Comma-separated killing rates, e.g. 1,4,16,64.
        #[arg(long, value_delimiter = ',')]
        schedule: Vec<String>,
        /// Start point as comma-separated coordinates (default: origin).
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo one-point decay on lattice balls.
    Scaling {
        #[arg(long = "d")]
        dimension: usize,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<u32>,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        /// Target distances along the first axis (default: powers of two up to R/4).
        #[arg(long, value_delimiter = ',')]
        distances: Option<Vec<i32>>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sample loop-erased killed walks on a graph file.
    Sample {
        graph: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn load(path: &PathBuf) -> Result<WeightedGraph, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    WeightedGraph::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn finish(report: VerificationReport, csv: Option<PathBuf>) -> Result<i32, String> {
    print_json(&report).map_err(|e| e.to_string())?;
    if let Some(path) = csv {
        report.write_csv(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for c in report.failures() {
        eprintln!("FAIL {}: {} != {}", c.name, c.lhs, c.rhs);
    }
    Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
}

fn run(cli: Cli) -> Result<i32, String> {
    let err = |e: lerw_core::Error| e.to_string();
    match cli.command {
        Command::Verify { graph, degree, triples, seed, csv } => {
            let g = load(&graph)?;
            let report = commands::verify(&g, &VerifyOptions { degree, triples, seed }).map_err(err)?;
            finish(report, csv)
        }
        Command::Limit { dimension, radius, schedule, a, b, csv } => {
            let schedule = schedule.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>().map_err(err)?;
            let a = match a {
                Some(text) => commands::parse_point(&text, dimension).map_err(err)?,
                None => [0; 3],
            };
            let b = commands::parse_point(&b, dimension).map_err(err)?;
            finish(commands::limit(dimension, radius, &schedule, a, b).map_err(err)?, csv)
        }
        Command::Scaling { dimension, radii, samples, seed, distances, csv } => {
            let report = commands::scaling(dimension, &radii, samples, seed, distances.as_deref()).map_err(err)?;
            finish(report, csv)
        }
        Command::Sample { graph, from, samples, seed, csv } => {
            let g = load(&graph)?;
            let from = g.vertex(&from).map_err(err)?;
            let report = commands::sample(&g, from, samples, seed).map_err(err)?;
            print_json(&report).map_err(|e| e.to_string())?;
            if let Some(path) = csv {
                let write = || -> Result<(), Box<dyn std::error::Error>> {
                    let mut w = csv::Writer::from_path(&path)?;
                    w.write_record(["saw", "exit", "count"])?;
                    for c in &report.counts {
                        w.write_record([c.saw.join(" "), c.exit.clone(), c.count.to_string()])?;
                    }
                    w.flush()?;
                    Ok(())
                };
                write().map_err(|e| format!("{}: {e}", path.display()))?;
            }
            Ok(EXIT_PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}

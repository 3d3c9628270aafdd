use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use morley::mesh::io::write_mesh;
use morley::{BoundaryCondition, Domain};
use morley_cli::config::parse_levels;
use morley_cli::report::rates_from_csv;
use morley_cli::{run_experiment, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "morley", version, about = "Morley element plate eigenvalue experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive level range, e.g. `2..6`.
        #[arg(long)]
        levels: Option<String>,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the mesh of a domain at a refinement level.
    Mesh {
        #[arg(long)]
        domain: String,
        #[arg(long = "levels", alias = "level")]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute convergence rates from a results CSV and print them as JSON.
    Rates {
        #[arg(long)]
        csv: PathBuf,
    },
}

fn run(cmd: Command, out_dir: &mut Option<PathBuf>) -> Result<(), CliError> {
    match cmd {
        Command::Run { config, levels, bc, alpha, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(l) = levels {
                cfg.levels = parse_levels(&l)?;
            }
            if let Some(b) = bc {
                cfg.bc = b.parse::<BoundaryCondition>()?;
            }
            if alpha.is_some() {
                cfg.alpha = alpha;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            *out_dir = Some(cfg.out.clone());
            let summary = run_experiment(&cfg)?;
            println!("{}", cfg.out.join("summary.json").display());
            match summary.failures.first() {
                None => Ok(()),
                Some(f) => Err(CliError::new(&f.kind, f.message.clone())),
            }
        }
        Command::Mesh { domain, level, out } => {
            let d: Domain = domain.parse()?;
            if level == 0 {
                return Err(CliError::config("levels start at 1"));
            }
            let mesh = d.mesh::<f64>(level);
            let file = fs::File::create(&out).map_err(|e| CliError::io(&out, e))?;
            write_mesh(&mesh, BufWriter::new(file))?;
            Ok(())
        }
        Command::Rates { csv } => {
            let rates = rates_from_csv(&csv)?;
            let text = serde_json::to_string_pretty(&rates).map_err(|e| CliError::new("serialize", e.to_string()))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn report_failure(e: &CliError, out_dir: Option<&Path>) {
    let record = serde_json::json!({ "status": "failed", "error": e });
    eprintln!("{record}");
    if let Some(dir) = out_dir {
        if dir.is_dir() {
            let _ = fs::write(dir.join("failure.json"), format!("{record:#}\n"));
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out_dir = None;
    match run(cli.command, &mut out_dir) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_failure(&e, out_dir.as_deref());
            ExitCode::FAILURE
        }
    }
}

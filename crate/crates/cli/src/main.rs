use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bicons::gallery::{gallery_text, list_gallery};
use bicons::runner::{run, scan, RunError, RunOptions};
use bicons::scene::{Scene, SceneError};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bicons",
    version,
    about = "Biconservative submanifold verification engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scene: PathBuf,
    /// Check to run; replaces the scene's list. Repeatable.
    #[arg(long = "check")]
    checks: Vec<String>,
    /// Random sampling with this many points.
    #[arg(long, conflicts_with = "grid")]
    samples: Option<usize>,
    /// Grid sampling, cells per variable, e.g. 10x10x10.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<Grid>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override NAME=VAL. Repeatable.
    #[arg(long = "tol", value_parser = parse_tol)]
    tols: Vec<(String, f64)>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scene's checks and report verdicts.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep one immersion parameter and tabulate a residual.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        residual: String,
    },
    /// List gallery kinds, parameters and constraints.
    Gallery {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone)]
struct Grid(Vec<usize>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split(['x', 'X'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad grid count `{p}`: {e}"))
        })
        .collect::<Result<_, _>>()
        .map(Grid)
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VAL, got `{s}`"))?;
    let v: f64 = v
        .parse()
        .map_err(|e| format!("bad tolerance value `{v}`: {e}"))?;
    Ok((k.to_string(), v))
}

fn options(c: &Common) -> RunOptions {
    RunOptions {
        checks: c.checks.clone(),
        grid: c.grid.as_ref().map(|g| g.0.clone()),
        samples: c.samples,
        seed: c.seed,
        tolerances: c.tols.iter().cloned().collect::<BTreeMap<_, _>>(),
        jobs: c.jobs,
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|e| RunError::Scene(SceneError::Io(e)))
}

fn execute(cmd: Command) -> Result<i32, RunError> {
    match cmd {
        Command::Gallery { format } => {
            match format {
                Format::Text => print!("{}", gallery_text()),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&list_gallery()).expect("serializable")
                ),
            }
            Ok(0)
        }
        Command::Run { common, csv } => {
            let scene = Scene::load(&common.scene)?;
            let outcome = run(&scene, &options(&common))?;
            let json = serde_json::to_string_pretty(&outcome.report).expect("serializable");
            if let Some(p) = &common.out {
                write_file(p, &json)?;
            }
            if let Some(p) = &csv {
                write_file(p, &outcome.csv())?;
            }
            match common.format {
                Format::Text => print!("{}", outcome.report.to_text()),
                Format::Json => println!("{json}"),
            }
            Ok(if outcome.report.any_fail() { 1 } else { 0 })
        }
        Command::Scan {
            common,
            param,
            from,
            to,
            steps,
            residual,
        } => {
            let scene = Scene::load(&common.scene)?;
            let result = scan(
                &scene,
                &param,
                from,
                to,
                steps,
                &residual,
                &options(&common),
            )?;
            let table = result.table();
            if let Some(p) = &common.out {
                write_file(p, &table)?;
            }
            match common.format {
                Format::Text => {
                    print!("{table}");
                    eprint!("{}", result.bracket_report());
                }
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&result).expect("serializable")
                ),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

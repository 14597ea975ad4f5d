// `!(x > 0.0)` is how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use config::{Command, Format, Overrides, Resolved, RunConfig};
use output::normalize_floats;

/// Mean-field Bose gas numerics: chemical-potential solves, phase scans,
/// grand-potential envelopes, the variational surface, exact
/// diagonalization and the property suite.
#[derive(Parser, Debug)]
#[command(name = "mfbose", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Effective chemical potential for every (β or κ, μ, η) tuple.
    MuSolve(Common),
    /// Finite-η condensate fraction against its limit.
    Phase(Common),
    /// Two-sided grand-potential envelopes over a (λ, δ) grid.
    Bounds(Common),
    /// Minimum of the reduced variational surface over a (λ, δ) grid.
    Surface(Common),
    /// Exact diagonalization of a truncated Fock space over a (λ, δ) grid.
    Ed(Common),
    /// Seeded property suite; exits 1 if any check fails.
    Verify(Common),
}

/// Flags shared by every command; they override the config file.
#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for scans.
    #[arg(long)]
    jobs: Option<usize>,
    /// Relative tolerance of the chemical-potential solve.
    #[arg(long)]
    tol: Option<f64>,
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::MuSolve(c) => (Command::MuSolve, c),
            Cmd::Phase(c) => (Command::Phase, c),
            Cmd::Bounds(c) => (Command::Bounds, c),
            Cmd::Surface(c) => (Command::Surface, c),
            Cmd::Ed(c) => (Command::Ed, c),
            Cmd::Verify(c) => (Command::Verify, c),
        }
    }
}

fn resolve(command: Command, common: Common) -> anyhow::Result<Resolved> {
    let file = match &common.config {
        Some(path) => config::load(path)?,
        None => RunConfig::default(),
    };
    let flags = Overrides {
        seed: common.seed,
        tol: common.tol,
        jobs: common.jobs,
        format: common.format,
        out: common.out,
    };
    file.resolve(command, flags)
}

fn meta(cfg: &Resolved) -> Value {
    json!({
        "command": cfg.command,
        "config": normalize_floats(serde_json::to_value(cfg).expect("config serializes")),
        "versions": { "mfbose": env!("CARGO_PKG_VERSION") },
    })
}

fn sink(cfg: &Resolved) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

/// Runs one command; `Ok(false)` means the property suite found a violation.
fn run(command: Command, cfg: &Resolved) -> anyhow::Result<bool> {
    let m = meta(cfg);
    if command == Command::Verify {
        let (table, reports) = commands::verify(cfg)?;
        let mut w = sink(cfg)?;
        match cfg.format {
            Format::Csv => table.write_csv(&mut w)?,
            Format::Json => {
                let checks = normalize_floats(serde_json::to_value(&reports)?);
                let passed = reports.iter().all(|r| r.passed);
                serde_json::to_writer_pretty(&mut w, &json!({ "meta": m, "passed": passed, "rows": checks }))?;
                writeln!(w)?;
            }
        }
        w.flush()?;
        if let Some(bad) = reports.iter().find(|r| !r.passed) {
            eprintln!("check `{}` failed with margin {:e}", bad.name, bad.margin);
            return Ok(false);
        }
        return Ok(true);
    }
    let table = match command {
        Command::MuSolve => commands::mu_solve(cfg)?,
        Command::Phase => commands::phase(cfg)?,
        Command::Bounds => commands::bounds(cfg)?,
        Command::Surface => commands::surface(cfg)?,
        Command::Ed => commands::ed(cfg)?,
        Command::Verify => unreachable!(),
    };
    let mut w = sink(cfg)?;
    table.write(cfg.format, &m, &mut w)?;
    w.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = cli.command.split();
    let outcome = resolve(command, common).and_then(|cfg| run(command, &cfg));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let record = json!({
                "error": {
                    "command": command.name(),
                    "message": format!("{e:#}"),
                }
            });
            eprintln!("{record}");
            ExitCode::from(2)
        }
    }
}

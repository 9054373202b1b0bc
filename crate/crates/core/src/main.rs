use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vocdm::harness::{
    run_experiment, run_verify, with_workers, write_records, ExperimentConfig, ExperimentKind, OutputFormat,
};

/// VOCDM link-level experiments.
#[derive(Debug, Parser)]
#[command(name = "vocdm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the self-check suite; exits nonzero if any check fails.
    Verify(Common),
    /// Monte Carlo BER versus SNR.
    Ber(Common),
    /// Empirical and approximate CCDF of the instantaneous PAPR.
    PaprCcdf(Common),
    /// Exhaustive overall PAPR table.
    PaprTable(Common),
    /// Data-dependent diversity of random data blocks.
    DiversityScan(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment file; missing keys take the preset values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, value_name = "INT")]
    workers: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

impl Command {
    fn split(&self) -> (ExperimentKind, &Common) {
        match self {
            Command::Verify(c) => (ExperimentKind::Verify, c),
            Command::Ber(c) => (ExperimentKind::Ber, c),
            Command::PaprCcdf(c) => (ExperimentKind::PaprCcdf, c),
            Command::PaprTable(c) => (ExperimentKind::PaprTable, c),
            Command::DiversityScan(c) => (ExperimentKind::DiversityScan, c),
        }
    }
}

fn load(kind: ExperimentKind, args: &Common) -> vocdm::Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_path(path, Some(kind))?,
        None => ExperimentConfig::preset(kind),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    if let Some(f) = args.format {
        cfg.format = f.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(cfg: &ExperimentConfig) -> vocdm::Result<Box<dyn Write>> {
    Ok(match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: &Cli) -> vocdm::Result<bool> {
    let (kind, args) = cli.command.split();
    let cfg = load(kind, args)?;
    if kind == ExperimentKind::Verify {
        let report = with_workers(cfg.workers, || run_verify(cfg.seed))?;
        for c in &report.checks {
            eprintln!(
                "{} {:<32} residual {:.3e} (tol {:.0e}, {} cases)",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance,
                c.cases
            );
        }
        let mut out = sink(&cfg)?;
        match cfg.format {
            OutputFormat::Csv => report.write_csv(&mut out)?,
            OutputFormat::Json => report.write_json(&mut out)?,
        }
        out.flush()?;
        return Ok(report.passed());
    }
    let records = run_experiment(&cfg)?;
    let mut out = sink(&cfg)?;
    write_records(&records, cfg.format, &mut out)?;
    out.flush()?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coorbit::besov::Exponent;
use coorbit::RunConfig;

mod commands;
mod input;
mod output;

#[derive(Parser)]
#[command(name = "coorbit", version = output::VERSION, about = "Decide coorbit equivalence of matrix dilation groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Base window K; runs use K, 2K and 4K.
    #[arg(long = "window")]
    window: Option<u32>,
    /// Sample budget for sampled intersection tests.
    #[arg(long = "budget")]
    budget: Option<usize>,
    /// Seed for every sampled stage.
    #[arg(long = "seed")]
    seed: Option<u64>,
    /// Grid points per axis for FFT norms.
    #[arg(long = "grid")]
    grid: Option<usize>,
    /// JSON run configuration; flags override its fields.
    #[arg(long = "config")]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV outputs; without it the JSON report goes to stdout.
    #[arg(long = "out")]
    out: Option<PathBuf>,
}

impl Common {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => input::load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(k) = self.window {
            cfg.window = k;
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.grid {
            cfg.grid = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility, properness, cover statistics and growth of one group.
    Analyze {
        group: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Equivalence verdict for a pair `{"a": group, "b": group}`.
    Compare {
        pair: PathBuf,
        /// Attach a quasi-isometry certificate for the transition map.
        #[arg(long)]
        with_qi: bool,
        /// Attach decomposition-norm ratios over a packet battery.
        #[arg(long)]
        with_norms: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Decomposition-norm ratios of a pair over a packet battery.
    BesovCompare {
        pair: PathBuf,
        /// JSON array of packets; a scale battery along the mismatch direction when absent.
        #[arg(long)]
        battery: Option<PathBuf>,
        #[arg(long, default_value = "1")]
        p: Exponent,
        #[arg(long, default_value = "1")]
        q: Exponent,
        #[command(flatten)]
        common: Common,
    },
    /// Cover elements and adjacency at window K.
    ExportCover {
        group: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Word-ball volumes and the linear-growth test.
    Growth {
        group: PathBuf,
        /// Comma-separated radii; a default log-spaced set when absent.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Half-width δ of the chart box generating set.
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> anyhow::Result<commands::Status> {
    match cli.command {
        Command::Analyze { group, common } => {
            commands::analyze(&group, &common.run_config()?, common.out)
        }
        Command::Compare { pair, with_qi, with_norms, common } => {
            commands::compare(&pair, &common.run_config()?, with_qi, with_norms, common.out)
        }
        Command::BesovCompare { pair, battery, p, q, common } => {
            commands::besov_compare(&pair, battery.as_deref(), p, q, &common.run_config()?, common.out)
        }
        Command::ExportCover { group, common } => {
            commands::export_cover(&group, &common.run_config()?, common.out)
        }
        Command::Growth { group, radii, step, common } => {
            commands::growth(&group, radii, step, &common.run_config()?, common.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(commands::Status::Decided) => ExitCode::SUCCESS,
        Ok(commands::Status::Inconclusive) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

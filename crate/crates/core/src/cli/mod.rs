//! The `bosonmc` command-line workbench.
//!
//! Every verb reads an [`InstanceConfig`], runs one pipeline and writes its
//! results to the output directory. Reruns with the same config and seed
//! produce byte-identical files.

mod commands;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::InstanceConfig;
use crate::Result;

pub use commands::{error_budget, BudgetRow};

#[derive(Debug, Parser)]
#[command(name = "bosonmc", version, about = "Boson-sampling assisted Monte Carlo integration")]
pub struct Cli {
    /// Instance configuration (TOML). Defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides the base seed of the configuration.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
    /// Overrides the output directory of the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    Modes,
    Jitter,
    S,
    Fidelity,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Modes => "modes",
            Axis::Jitter => "jitter",
            Axis::S => "s",
            Axis::Fidelity => "fidelity",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// First-order energy under each noise source: fine-grid reference,
    /// ideal, overlaps only, fidelity only, both, distinguishable.
    ErrorBudget,
    /// Run one parameter sweep and write its plot data.
    Sweep {
        #[arg(long, value_enum)]
        axis: Axis,
    },
    /// Compare measured counts against ideal and noisy simulations.
    Compare {
        #[arg(long, value_name = "PATH")]
        counts: PathBuf,
    },
    /// Draw patterns from the configured distribution and estimate the energy
    /// from them.
    Sample {
        /// Number of draws (defaults to `sampling.samples`).
        #[arg(long)]
        count: Option<usize>,
    },
    /// Dump the encoding unitary of the base grid.
    Encode,
    /// Dump the enumerated output distribution.
    Distribution {
        /// List every pattern including collisions instead of postselecting.
        #[arg(long)]
        collisions: bool,
    },
    /// Search grid extent and coupling for given target energies.
    Calibrate,
}

/// Resolved run settings shared by all verbs.
pub struct Context {
    pub config: InstanceConfig,
    pub out: PathBuf,
    pub format: Format,
}

impl Context {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let mut config = match &cli.config {
            Some(path) => InstanceConfig::load(path)?,
            None => InstanceConfig::default(),
        };
        if let Some(seed) = cli.seed {
            config.seed = seed;
        }
        let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
        config.output_dir = out.clone();
        config.validate()?;
        Ok(Context { config, out, format: cli.format })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>> {
        std::fs::create_dir_all(&self.out)?;
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(self.path(name))
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(self.path(name))
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let ctx = Context::from_cli(cli)?;
    match &cli.command {
        Command::ErrorBudget => commands::cmd_error_budget(&ctx),
        Command::Sweep { axis } => commands::cmd_sweep(&ctx, *axis),
        Command::Compare { counts } => commands::cmd_compare(&ctx, counts),
        Command::Sample { count } => commands::cmd_sample(&ctx, count.unwrap_or(ctx.config.sampling.samples)),
        Command::Encode => commands::cmd_encode(&ctx),
        Command::Distribution { collisions } => commands::cmd_distribution(&ctx, *collisions),
        Command::Calibrate => commands::cmd_calibrate(&ctx),
    }
}

/// Parses `args`, runs the verb and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::{CommonArgs, Layer, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "epigvf",
    version,
    about = "Fourier-series path reconstruction and guiding-vector-field tracking"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the centred DFT of the path samples to spectrum.csv.
    Transform {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Write sampled reconstructions for each window in the list.
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated windows, e.g. `10,20,40,100,full`.
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        m_list: Option<Vec<config::Window>>,
        /// Curve samples per reconstruction (default N).
        #[arg(long)]
        theta_samples: Option<usize>,
    },
    /// Follow the field of the windowed reconstruction from the initial state.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Keep every n-th trajectory row.
        #[arg(long)]
        stride: Option<usize>,
    },
    /// Monte-Carlo check of the ultimate tracking error against the bound.
    Certify {
        #[command(flatten)]
        common: CommonArgs,
        /// Scale time-averaged error by 2 pi before comparing.
        #[arg(long)]
        e_ms_literal: bool,
    },
    /// Tabulate the bound and its backward difference over m.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Transform { common } => {
            commands::transform(&RunConfig::resolve(&common, Layer::default())?)
        }
        Command::Reconstruct {
            common,
            m_list,
            theta_samples,
        } => {
            let extra = Layer {
                m_list,
                theta_samples,
                ..Layer::default()
            };
            commands::reconstruct(&RunConfig::resolve(&common, extra)?)
        }
        Command::Simulate { common, stride } => {
            let extra = Layer {
                stride,
                ..Layer::default()
            };
            commands::simulate(&RunConfig::resolve(&common, extra)?)
        }
        Command::Certify {
            common,
            e_ms_literal,
        } => {
            let extra = Layer {
                e_ms_literal: e_ms_literal.then_some(true),
                ..Layer::default()
            };
            commands::certify(&RunConfig::resolve(&common, extra)?)
        }
        Command::Sweep { common } => {
            commands::sweep(&RunConfig::resolve(&common, Layer::default())?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

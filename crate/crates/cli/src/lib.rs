//! Command-line front end for `rufst`: configuration, array and image files,
//! atom rendering, feature export and the verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod image_io;
pub mod npy;
pub mod record;
pub mod render;
pub mod signals;
pub mod verify;

use clap::{Parser, Subcommand};

pub use config::{JobConfig, Overrides};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "rufst",
    version,
    about = "Rotational covering frames and Fourier scattering on 2-D grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or render a frame.
    Frame {
        #[command(subcommand)]
        action: FrameAction,
    },
    /// Compute scattering features of an image.
    Scatter,
    /// Finite frame coefficients of an array.
    Analyze,
    /// Run the self-check suites.
    Verify {
        /// Run only the named check (repeatable).
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Break the named check on purpose (negative control).
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum FrameAction {
    /// Build the frame and report partition and wedge checks.
    Build,
    /// Write per-atom images and the montage.
    Render,
}

/// Parse-free entry point used by `main` and the tests.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Result<i32, CliError> {
    let mut cfg = JobConfig::resolve(&cli.flags)?;
    let size_given = cli.flags.size.is_some();
    match &cli.command {
        Command::Frame {
            action: FrameAction::Build,
        } => commands::frame_build(&cfg, out),
        Command::Frame {
            action: FrameAction::Render,
        } => commands::frame_render(&cfg, out),
        Command::Scatter => commands::scatter_cmd(&cfg, size_given, out),
        Command::Analyze => commands::analyze_cmd(&cfg, size_given, out),
        Command::Verify { suites, mutate } => {
            if !suites.is_empty() {
                cfg.verify.suites = suites.clone();
            }
            if mutate.is_some() {
                cfg.verify.mutate = mutate.clone();
            }
            commands::verify_cmd(&cfg, out)
        }
    }
}

/// Size the global worker pool from `RUFST_THREADS` (unset or 0 = automatic).
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RUFST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        CliError::config(format!(
            "invalid parameter `RUFST_THREADS`: `{raw}` is not a count"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("invalid parameter `RUFST_THREADS`: {e}")))?;
    }
    Ok(())
}

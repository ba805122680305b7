use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::info;
use tapemouse_core::segmentation::capture_background;
use tapemouse_core::{Frame, PipelineConfig};
use tapemouse_harness::config::{dump, load_config};
use tapemouse_harness::eventlog::{load_calibration, render_calibration, save_calibration};
use tapemouse_harness::frames::FrameDir;
use tapemouse_harness::{bench, run_calibration, run_pipeline, Server};

#[derive(Parser)]
#[command(name = "tapemouse", version, about = "Colour-tape virtual mouse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a frame directory and write the event log.
    Run {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        calib: PathBuf,
        /// Event log path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure D and D' from open-hand and pinched frame directories.
    Calibrate {
        #[arg(long)]
        open: PathBuf,
        #[arg(long)]
        pinch: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Frames of the empty scene used as the background model.
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time every pipeline stage over a frame directory.
    Bench {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        calib: Option<PathBuf>,
    },
    /// Serve the WebSocket frame-stream protocol.
    Serve {
        #[arg(long, default_value_t = 8765)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the effective configuration.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    Dump {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn config_or_default(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
    match path {
        Some(p) => load_config(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(PipelineConfig::default()),
    }
}

fn frames(dir: &Path, config: &PipelineConfig) -> anyhow::Result<FrameDir> {
    FrameDir::open(dir, config.fps).with_context(|| format!("opening frame directory {}", dir.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { frames: dir, config, calib, out } => {
            let config = config_or_default(config.as_deref())?;
            let cal = load_calibration(&calib)?;
            let log = run_pipeline(frames(&dir, &config)?, &config, cal)?;
            info!("{} events", log.len());
            write_output(out.as_deref(), &log.render())?;
        }
        Command::Calibrate { open, pinch, config, background, out } => {
            let config = config_or_default(config.as_deref())?;
            let background = match background {
                Some(dir) => {
                    let bg: Vec<Frame> = frames(&dir, &config)?.collect::<Result<_, _>>()?;
                    if bg.is_empty() {
                        bail!("background directory {} has no frames", dir.display());
                    }
                    Some(capture_background(&bg)?)
                }
                None => None,
            };
            let cal = run_calibration(frames(&open, &config)?, frames(&pinch, &config)?, &config, background)?;
            match out {
                Some(p) => save_calibration(&p, &cal)?,
                None => print!("{}", render_calibration(&cal)),
            }
        }
        Command::Bench { frames: dir, config, calib } => {
            let config = config_or_default(config.as_deref())?;
            let cal = calib.as_deref().map(load_calibration).transpose()?;
            let report = bench(frames(&dir, &config)?, &config, cal)?;
            print!("{report}");
        }
        Command::Serve { port, host, config } => {
            let config = config_or_default(config.as_deref())?;
            config.validate()?;
            let server = Server::bind((host.as_str(), port), config)?;
            let addr = server.local_addr()?;
            println!("listening on ws://{addr}");
            server.run()?;
        }
        Command::Config { action: ConfigAction::Dump { config } } => {
            print!("{}", dump(&config_or_default(config.as_deref())?));
        }
    }
    Ok(())
}

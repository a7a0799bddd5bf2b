use std::path::PathBuf;

use airbutton_core::{Condition, TouchMode};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Aerial push-button simulator: focused-ultrasound force sweeps, scripted
/// button sessions, field exports and a live pipeline service.
///
/// Every option can also be set through an environment variable with the
/// `AIRBUTTON_` prefix, e.g. `AIRBUTTON_SCENE`, `AIRBUTTON_OUT_DIR`,
/// `AIRBUTTON_PORT`.
#[derive(Debug, Parser)]
#[command(name = "airbutton", version)]
pub struct Cli {
    /// Scene/config TOML. The built-in reference scene is used when omitted.
    #[arg(long, global = true, env = "AIRBUTTON_SCENE")]
    pub scene: Option<PathBuf>,

    /// Directory for output files; created if missing.
    #[arg(long, global = true, env = "AIRBUTTON_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,

    /// Recorded in the run manifest. Also seeds chatter in `session`.
    #[arg(long, global = true, env = "AIRBUTTON_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Force on the bar over gaps and focal heights of 1-10 mm.
    Sweep(SweepArgs),
    /// Run one scripted press/release session through the pipeline.
    Session(SessionArgs),
    /// Export the steady-state pressure field around the focus.
    Field(FieldArgs),
    /// Stream the live pipeline over a websocket on localhost.
    Serve(ServeArgs),
    /// Write the built-in reference scene as TOML to stdout.
    DefaultScene,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Round forces to the 0.1 g (0.98 mN) steps of the scale.
    #[arg(long, env = "AIRBUTTON_QUANTIZE_SCALE")]
    pub quantize_scale: bool,

    /// Uniform drive amplitude in [0, 1].
    #[arg(long, default_value_t = 1.0, env = "AIRBUTTON_AMPLITUDE")]
    pub amplitude: f64,

    /// Disc/plate reflections after the first plate image.
    #[arg(long, env = "AIRBUTTON_BOUNCE_ORDER")]
    pub bounce_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TouchArg {
    Touching,
    Airborne,
}

impl From<TouchArg> for TouchMode {
    fn from(t: TouchArg) -> Self {
        match t {
            TouchArg::Touching => TouchMode::TouchingPlate,
            TouchArg::Airborne => TouchMode::Airborne,
        }
    }
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// down, up or both. Same as `--condition`.
    #[arg(value_name = "CONDITION", conflicts_with = "condition")]
    pub condition_pos: Option<Condition>,

    /// Burst length in ms. Same as `--burst-ms`.
    #[arg(value_name = "BURST_MS", conflicts_with = "burst_ms")]
    pub burst_ms_pos: Option<f64>,

    /// down, up or both. Defaults to the config file.
    #[arg(long, env = "AIRBUTTON_CONDITION")]
    pub condition: Option<Condition>,

    /// Burst length in ms; must be one of the configured values.
    #[arg(long, env = "AIRBUTTON_BURST_MS")]
    pub burst_ms: Option<f64>,

    #[arg(long, value_enum, env = "AIRBUTTON_TOUCH")]
    pub touch: Option<TouchArg>,

    #[arg(long, env = "AIRBUTTON_CYCLES")]
    pub cycles: Option<usize>,

    #[arg(long, env = "AIRBUTTON_PERIOD_S")]
    pub period_s: Option<f64>,

    #[arg(long, env = "AIRBUTTON_AMPLITUDE_MM")]
    pub amplitude_mm: Option<f64>,

    /// Sensor sampling rate; overrides the config file.
    #[arg(long, env = "AIRBUTTON_SAMPLING_HZ")]
    pub sampling_hz: Option<f64>,

    /// Add seeded height jitter to the trajectory.
    #[arg(long, env = "AIRBUTTON_CHATTER_SEED")]
    pub chatter_seed: Option<u64>,

    /// Peak jitter in micrometres. Defaults to 90% of the height change that
    /// moves the photovoltage by half the hysteresis band.
    #[arg(long, env = "AIRBUTTON_CHATTER_UM")]
    pub chatter_um: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldFormat {
    Csv,
    Bin,
    Both,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Focus height above the plate; defaults to the configured focal height.
    #[arg(long, env = "AIRBUTTON_FOCAL_MM")]
    pub focal_mm: Option<f64>,

    /// Half-width of the grid in x and y.
    #[arg(long, default_value_t = 40.0)]
    pub extent_mm: f64,

    #[arg(long, default_value_t = 20.0)]
    pub height_mm: f64,

    #[arg(long, default_value_t = 1.0)]
    pub spacing_mm: f64,

    #[arg(long, value_enum, default_value_t = FieldFormat::Both)]
    pub format: FieldFormat,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 250.0, env = "AIRBUTTON_TICK_HZ")]
    pub tick_hz: f64,

    #[arg(long, default_value_t = 8765, env = "AIRBUTTON_PORT")]
    pub port: u16,

    /// Append applied inputs as JSON lines to this file.
    #[arg(long, env = "AIRBUTTON_RECORD")]
    pub record: Option<PathBuf>,

    /// Offline mode: replay a recorded input log without networking and
    /// write the frames to `frames.jsonl` in the output directory.
    #[arg(long, requires = "ticks")]
    pub replay: Option<PathBuf>,

    /// Stop after this many ticks.
    #[arg(long)]
    pub ticks: Option<u64>,

    /// Finger height before any input arrives, mm.
    #[arg(long, default_value_t = 20.0)]
    pub initial_height_mm: f64,
}

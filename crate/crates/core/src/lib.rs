//! Simulation core for an aerial push-button whose tactile feedback comes from
//! a focused ultrasound field reflected off the input plate.
//!
//! The crate is organised along the signal path:
//!
//! * [`geometry`]: transducer lattices, array poses, the reflecting plate and
//!   the reference scene.
//! * [`acoustics`]: focusing through the plate image, complex pressure
//!   fields, focal metrics and radiation force on a disc proxy.
//! * [`sensing`]: IR beam occlusion by the finger and the hysteresis edge
//!   detector that turns photovoltage into button events.
//! * [`controller`]: two-stage burst scheduling from button events.
//! * [`harness`]: scripted trajectories, sessions and the force sweep.
//! * [`live`]: the tick-driven pipeline behind the streaming service.
//! * [`io`]: config files and CSV / binary exports.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod config;
pub mod controller;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod live;
pub mod sensing;

pub use num_complex::Complex64;

pub use acoustics::{
    focus_phases, mirror_point, pressure_at, radiation_force_disc, wavelength, DiscTarget,
    DriveState, FieldGrid, FocusSpec, ForceOptions, GridSpec,
};
pub use config::{Config, SensorConfig, SessionDefaults};
pub use controller::{
    burst_envelope, controller_step, Condition, ControllerState, FeedbackConfig, FocusCommand,
};
pub use error::{Error, Result};
pub use geometry::{
    build_lattice, default_scene, pose_array, ArrayPose, PosedArray, ReflectingPlane, Scene,
    Transducer, TransducerLattice, Vec3,
};
pub use harness::{
    dominant_period, run_force_sweep, run_session, sinusoid_trajectory, SessionLog, SweepOptions,
    SweepResult, TouchMode, Trajectory,
};
pub use live::{InputMessage, LivePipeline, TickFrame};
pub use sensing::{
    detector_step, occlusion, photovoltage, BeamModel, ButtonEvent, DetectorState, EventKind,
    FingerModel, Region, Thresholds,
};

/// End-to-end latency bound for sensing plus scheduling, in seconds.
pub const LATENCY_BUDGET: f64 = 0.015;

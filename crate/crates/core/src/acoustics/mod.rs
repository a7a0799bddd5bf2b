//! Phased-array acoustics over a reflecting plate.

mod directivity;
mod drive;
mod field;
mod force;
pub mod sum;

pub use directivity::{bessel_j1, Directivity};
pub use drive::{focus_phases, DriveState, FocusSpec};
pub use field::{
    boundary_residual, field_grid, field_grid_with, focal_metrics, pressure_at, FieldGrid,
    FieldModel, FocalMetrics, GridSpec, OcclusionMask, Source, SourceSet,
};
pub use force::{
    calibrate_source_pressure, disc_force, gauss_legendre, radiation_force_disc, reference_force,
    DiscQuadrature, DiscTarget, ForceOptions, BAR_RADIUS, REFERENCE_DISTANCE,
};

use crate::error::{invalid, Result};
use crate::geometry::{ReflectingPlane, Vec3};

pub fn wavelength(frequency: f64, sound_speed: f64) -> Result<f64> {
    if !(frequency > 0.0) || !(sound_speed > 0.0) {
        return Err(invalid("frequency and sound speed must be positive"));
    }
    Ok(sound_speed / frequency)
}

pub fn mirror_point(plane: &ReflectingPlane, p: &Vec3) -> Vec3 {
    plane.mirror_point(p)
}

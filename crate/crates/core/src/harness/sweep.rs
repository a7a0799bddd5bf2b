use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::period::dominant_period;
use crate::acoustics::BAR_RADIUS;
use crate::acoustics::{focus_phases, radiation_force_disc, DiscTarget, FocusSpec, ForceOptions};
use crate::error::{invalid, Result};
use crate::geometry::{Scene, Vec3, MM};

/// Resolution of the scale used to weigh the bar, 0.1 g, as a force
/// (0.98 mN, so rounding never moves a value by more than 0.49 mN).
pub const SCALE_STEP: f64 = 0.98e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Bar-to-plate distances, metres.
    pub gaps: Vec<f64>,
    /// Focus heights above the plate, metres.
    pub focal_heights: Vec<f64>,
    pub xy: [f64; 2],
    pub disc_radius: f64,
    pub force: ForceOptions,
    /// Uniform drive amplitude in [0, 1].
    pub amplitude: f64,
    /// Round forces to [`SCALE_STEP`].
    pub quantize: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        let mm_steps: Vec<f64> = (1..=10).map(|i| i as f64 * MM).collect();
        Self {
            gaps: mm_steps.clone(),
            focal_heights: mm_steps,
            xy: [0.0, 0.0],
            disc_radius: BAR_RADIUS,
            force: ForceOptions::default(),
            amplitude: 1.0,
            quantize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub gaps: Vec<f64>,
    pub focal_heights: Vec<f64>,
    /// Newtons, `forces[gap][focal_height]`.
    pub forces: Vec<Vec<f64>>,
    pub quantized: bool,
}

impl SweepResult {
    pub fn force(&self, gap_index: usize, focal_index: usize) -> f64 {
        self.forces[gap_index][focal_index]
    }

    /// Force against gap (both in mm and N) at one focal height.
    pub fn gap_series(&self, focal_index: usize) -> Vec<(f64, f64)> {
        self.gaps
            .iter()
            .zip(&self.forces)
            .map(|(g, row)| (g / MM, row[focal_index]))
            .collect()
    }

    /// Dominant gap period in mm for every focal height.
    pub fn periods_mm(&self) -> Vec<Result<f64>> {
        (0..self.focal_heights.len())
            .map(|j| dominant_period(&self.gap_series(j)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.gaps.len() * self.focal_heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn quantize_force(f: f64) -> f64 {
    (f / SCALE_STEP).round() * SCALE_STEP
}

/// Force on the bar for every (gap, focal height) pair. Cells are
/// independent and evaluated in parallel; results do not depend on the
/// pool size.
pub fn run_force_sweep(scene: &Scene, options: &SweepOptions) -> Result<SweepResult> {
    scene.validate()?;
    if options.gaps.is_empty() || options.focal_heights.is_empty() {
        return Err(invalid("sweep needs at least one gap and one focal height"));
    }
    if !(0.0..=1.0).contains(&options.amplitude) {
        return Err(invalid("sweep amplitude must lie in [0, 1]"));
    }
    let drives = options
        .focal_heights
        .iter()
        .map(|&h| {
            let target = Vec3::new(options.xy[0], options.xy[1], h);
            focus_phases(scene, &FocusSpec::reflected(target))?.with_amplitude_scale(options.amplitude)
        })
        .collect::<Result<Vec<_>>>()?;
    let nf = options.focal_heights.len();
    let cells = (0..options.gaps.len() * nf)
        .into_par_iter()
        .map(|idx| {
            let (gi, fi) = (idx / nf, idx % nf);
            let disc = DiscTarget::above_plate(scene, options.xy, options.gaps[gi], options.disc_radius);
            let f = radiation_force_disc(scene, &drives[fi], &disc, &options.force)?;
            Ok(if options.quantize { quantize_force(f) } else { f })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepResult {
        gaps: options.gaps.clone(),
        focal_heights: options.focal_heights.clone(),
        forces: cells.chunks(nf).map(|c| c.to_vec()).collect(),
        quantized: options.quantize,
    })
}

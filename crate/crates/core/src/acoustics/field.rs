//! Complex pressure from a set of point sources, with the plate handled by
//! image sources.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::directivity::Directivity;
use super::drive::DriveState;
use super::sum::ComplexSum;
use crate::error::{invalid, Error, Result};
use crate::geometry::{ReflectingPlane, Scene, Vec3};

/// Hook for blocking source-to-point paths, e.g. the user's hand.
pub trait OcclusionMask: Send + Sync {
    fn blocks(&self, source: &Vec3, point: &Vec3) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Source {
    pub position: Vec3,
    /// Axis for the directivity pattern.
    pub normal: Vec3,
    /// `source_pressure * amplitude * exp(i phase)`, already scaled by any
    /// reflection coefficients along the image path.
    pub weight: Complex64,
}

impl Source {
    /// Mirror across `plane`, scaling by `coefficient`.
    pub fn mirrored(&self, plane: &ReflectingPlane, coefficient: f64) -> Self {
        Self {
            position: plane.mirror_point(&self.position),
            normal: plane.mirror_direction(&self.normal),
            weight: self.weight * coefficient,
        }
    }
}

/// Point sources in a homogeneous medium. Field convention
/// `exp(i (w t - k r))`, so each source contributes
/// `weight * D(theta) / r * exp(-i k r)`.
#[derive(Clone)]
pub struct SourceSet {
    sources: Vec<Source>,
    wavenumber: f64,
    ka: f64,
    directivity: Directivity,
    occlusion: Option<Arc<dyn OcclusionMask>>,
}

impl std::fmt::Debug for SourceSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SourceSet")
            .field("sources", &self.sources.len())
            .field("wavenumber", &self.wavenumber)
            .field("directivity", &self.directivity)
            .field("occlusion", &self.occlusion.is_some())
            .finish()
    }
}

impl SourceSet {
    pub fn new(sources: Vec<Source>, wavenumber: f64, element_radius: f64, directivity: Directivity) -> Self {
        Self {
            sources,
            wavenumber,
            ka: wavenumber * element_radius,
            directivity,
            occlusion: None,
        }
    }

    pub fn with_occlusion(mut self, mask: Arc<dyn OcclusionMask>) -> Self {
        self.occlusion = Some(mask);
        self
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    #[inline]
    pub fn contribution(&self, s: &Source, p: &Vec3) -> Result<Complex64> {
        let d = p - s.position;
        let r = d.norm();
        if r < 1e-12 {
            return Err(Error::Singular);
        }
        if let Some(mask) = &self.occlusion {
            if mask.blocks(&s.position, p) {
                return Ok(Complex64::new(0.0, 0.0));
            }
        }
        let dir = self.directivity.factor(self.ka, s.normal.dot(&d) / r);
        Ok(s.weight * (dir / r) * Complex64::from_polar(1.0, -self.wavenumber * r))
    }

    /// Total pressure at `p`, summed in source order with compensation.
    pub fn pressure(&self, p: &Vec3) -> Result<Complex64> {
        let mut acc = ComplexSum::default();
        for s in &self.sources {
            acc.add(self.contribution(s, p)?);
        }
        Ok(acc.value())
    }
}

/// A driven scene: real elements plus their plate images.
#[derive(Clone, Debug)]
pub struct FieldModel {
    plane: ReflectingPlane,
    sources: SourceSet,
    direct_count: usize,
}

impl FieldModel {
    pub fn new(scene: &Scene, drive: &DriveState) -> Result<Self> {
        drive.validate()?;
        Self::from_weights(scene, &drive.weights())
    }

    /// Arbitrary complex element weights, for superposition checks.
    pub fn from_weights(scene: &Scene, weights: &[Complex64]) -> Result<Self> {
        scene.validate()?;
        let direct = direct_sources(scene, weights)?;
        let direct_count = direct.len();
        let mut sources = direct.clone();
        let coefficient = scene.plane.reflection_coefficient;
        if coefficient != 0.0 {
            sources.extend(direct.iter().map(|s| s.mirrored(&scene.plane, coefficient)));
        }
        Ok(Self {
            plane: scene.plane.clone(),
            sources: SourceSet::new(sources, scene.wavenumber(), scene.element_radius(), scene.directivity),
            direct_count,
        })
    }

    pub fn with_occlusion(mut self, mask: Arc<dyn OcclusionMask>) -> Self {
        self.sources = self.sources.with_occlusion(mask);
        self
    }

    pub fn sources(&self) -> &SourceSet {
        &self.sources
    }

    /// Real (non-image) sources only.
    pub fn direct_sources(&self) -> &[Source] {
        &self.sources.sources()[..self.direct_count]
    }

    pub fn plane(&self) -> &ReflectingPlane {
        &self.plane
    }

    /// Pressure at a point on or above the plate.
    pub fn pressure_at(&self, p: &Vec3) -> Result<Complex64> {
        self.check_above(p)?;
        self.sources.pressure(p)
    }

    /// Analytic continuation of the field; no plate-side check.
    pub fn pressure_unchecked(&self, p: &Vec3) -> Result<Complex64> {
        self.sources.pressure(p)
    }

    fn check_above(&self, p: &Vec3) -> Result<()> {
        // Points on the plate are allowed to within rounding.
        if self.plane.signed_distance(p) < -1e-12 {
            return Err(Error::BelowPlane {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        Ok(())
    }
}

pub(crate) fn direct_sources(scene: &Scene, weights: &[Complex64]) -> Result<Vec<Source>> {
    let transducers = scene.transducers()?;
    if weights.len() != transducers.len() {
        return Err(invalid(format!(
            "drive has {} elements but the scene has {}",
            weights.len(),
            transducers.len()
        )));
    }
    Ok(transducers
        .iter()
        .zip(weights)
        .map(|(t, &w)| Source {
            position: t.position,
            normal: t.normal,
            weight: w,
        })
        .collect())
}

pub fn pressure_at(scene: &Scene, drive: &DriveState, p: &Vec3) -> Result<Complex64> {
    FieldModel::new(scene, drive)?.pressure_at(p)
}

/// Regular grid along three (usually orthonormal) axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub axes: [Vec3; 3],
    pub spacing: [f64; 3],
    pub dims: [usize; 3],
}

impl GridSpec {
    pub fn axis_aligned(origin: Vec3, spacing: [f64; 3], dims: [usize; 3]) -> Self {
        Self {
            origin,
            axes: [Vec3::x(), Vec3::y(), Vec3::z()],
            spacing,
            dims,
        }
    }

    /// Grid centred laterally on `center`, `dims` points per axis.
    pub fn centered(center: Vec3, spacing: [f64; 3], dims: [usize; 3]) -> Self {
        let half = |i: usize| (dims[i] as f64 - 1.0) / 2.0 * spacing[i];
        let origin = center - Vec3::new(half(0), half(1), half(2));
        Self::axis_aligned(origin, spacing, dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spacing.iter().any(|&s| !(s > 0.0)) {
            return Err(invalid("grid spacing must be positive"));
        }
        if self.dims.contains(&0) {
            return Err(invalid("grid dimensions must be at least 1"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index with the first axis fastest.
    pub fn index(&self, i: usize, j: usize, l: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * l)
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.dims[0];
        let j = (idx / self.dims[0]) % self.dims[1];
        let l = idx / (self.dims[0] * self.dims[1]);
        [i, j, l]
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        let [i, j, l] = self.unravel(idx);
        self.origin
            + self.axes[0] * (i as f64 * self.spacing[0])
            + self.axes[1] * (j as f64 * self.spacing[1])
            + self.axes[2] * (l as f64 * self.spacing[2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
}

impl FieldGrid {
    pub fn new(spec: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(invalid(format!(
                "grid expects {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }
}

/// Evaluate the field on every grid point. Points are independent, so the
/// work is spread over the current rayon pool; each value is computed the same
/// way regardless of pool size.
pub fn field_grid(scene: &Scene, drive: &DriveState, spec: &GridSpec) -> Result<FieldGrid> {
    let model = FieldModel::new(scene, drive)?;
    field_grid_with(&model, spec)
}

pub fn field_grid_with(model: &FieldModel, spec: &GridSpec) -> Result<FieldGrid> {
    spec.validate()?;
    if let Some(p) = (0..spec.len())
        .map(|i| spec.point(i))
        .find(|p| model.plane().signed_distance(p) < -1e-12)
    {
        return Err(Error::BelowPlane {
            x: p.x,
            y: p.y,
            z: p.z,
        });
    }
    let values = (0..spec.len())
        .into_par_iter()
        .map(|i| model.pressure_at(&spec.point(i)))
        .collect::<Result<Vec<_>>>()?;
    FieldGrid::new(spec.clone(), values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FocalMetrics {
    pub peak_position: Vec3,
    pub peak_magnitude: f64,
    /// Full width at half peak magnitude (-6 dB) along each grid axis.
    /// `None` when the field stays above half peak up to the grid edge.
    pub widths: [Option<f64>; 3],
    pub distance_to_target: f64,
}

pub fn focal_metrics(grid: &FieldGrid, target: &Vec3) -> Result<FocalMetrics> {
    let (peak_idx, peak_magnitude) = grid
        .values
        .iter()
        .map(|v| v.norm())
        .enumerate()
        .fold((0, 0.0), |best, (i, m)| if m > best.1 { (i, m) } else { best });
    if !(peak_magnitude > 0.0) {
        return Err(Error::NoPeak);
    }
    let spec = &grid.spec;
    let peak_position = spec.point(peak_idx);
    let centre = spec.unravel(peak_idx);
    let half = peak_magnitude / 2.0;
    let mut widths = [None; 3];
    for (axis, width) in widths.iter_mut().enumerate() {
        if spec.dims[axis] < 2 {
            continue;
        }
        let at = |n: usize| {
            let mut c = centre;
            c[axis] = n;
            grid.values[spec.index(c[0], c[1], c[2])].norm()
        };
        let crossing = |forward: bool| -> Option<f64> {
            let mut n = centre[axis];
            loop {
                let next = if forward {
                    if n + 1 >= spec.dims[axis] {
                        return None;
                    }
                    n + 1
                } else {
                    n.checked_sub(1)?
                };
                let (a, b) = (at(n), at(next));
                if b < half {
                    // Linear interpolation between samples n and next.
                    let frac = (a - half) / (a - b);
                    return Some((centre[axis].abs_diff(n) as f64 + frac) * spec.spacing[axis]);
                }
                n = next;
            }
        };
        if let (Some(lo), Some(hi)) = (crossing(false), crossing(true)) {
            *width = Some(lo + hi);
        }
    }
    Ok(FocalMetrics {
        peak_position,
        peak_magnitude,
        widths,
        distance_to_target: (peak_position - target).norm(),
    })
}

/// Largest normalised normal derivative `|dp/dn| / (k |p|)` over points on the
/// plate, by central differences with step `lambda / 100`. Points where the
/// field vanishes contribute 0.
pub fn boundary_residual(scene: &Scene, drive: &DriveState, points: &[Vec3]) -> Result<f64> {
    let model = FieldModel::new(scene, drive)?;
    let k = scene.wavenumber();
    let h = scene.wavelength() / 100.0;
    let n = scene.plane.normal;
    let mut worst: f64 = 0.0;
    for x in points {
        let on_plate = scene.plane.mirror_point(x).lerp(x, 0.5);
        let p0 = model.pressure_unchecked(&on_plate)?;
        if p0.norm() == 0.0 {
            continue;
        }
        let up = model.pressure_unchecked(&(on_plate + n * h))?;
        let down = model.pressure_unchecked(&(on_plate - n * h))?;
        let dpdn = (up - down) / (2.0 * h);
        worst = worst.max(dpdn.norm() / (k * p0.norm()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::focus_phases;
    use crate::acoustics::FocusSpec;
    use crate::geometry::{build_lattice, default_scene, ArrayPose, PosedArray, MM};

    fn monopole_single(z: f64) -> Scene {
        let mut s = default_scene();
        s.directivity = Directivity::Monopole;
        s.plane.reflection_coefficient = 0.0;
        s.arrays = vec![PosedArray {
            lattice: build_lattice(1, 1, 10.16 * MM, 4.5 * MM).unwrap(),
            pose: ArrayPose::new(Vec3::new(0.0, 0.0, z), -Vec3::z(), Vec3::x()).unwrap(),
        }];
        s
    }

    #[test]
    fn spherical_spreading() {
        let s = monopole_single(0.3);
        let d = DriveState::uniform(1, s.source_pressure);
        let near = pressure_at(&s, &d, &Vec3::new(0.0, 0.0, 0.2)).unwrap().norm();
        let far = pressure_at(&s, &d, &Vec3::new(0.0, 0.0, 0.1)).unwrap().norm();
        assert!((near / far - 2.0).abs() < 1e-12);
    }

    #[test]
    fn in_phase_elements_add() {
        // Four elements on a circle around the axis, all equidistant from the probe.
        let mut s = monopole_single(0.3);
        s.arrays[0].lattice = build_lattice(2, 2, 10.0 * MM, 4.0 * MM).unwrap();
        let probe = Vec3::new(0.0, 0.0, 0.1);
        let d = DriveState::uniform(4, s.source_pressure);
        let four = pressure_at(&s, &d, &probe).unwrap().norm();
        let r = (s.transducers().unwrap()[0].position - probe).norm();
        let one = s.source_pressure / r;
        assert!((four / one - 4.0).abs() < 1e-12);
    }

    #[test]
    fn evaluating_at_an_element_is_singular() {
        let s = monopole_single(0.3);
        let d = DriveState::uniform(1, s.source_pressure);
        assert!(matches!(
            pressure_at(&s, &d, &Vec3::new(0.0, 0.0, 0.3)),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn below_plate_rejected() {
        let s = default_scene();
        let d = DriveState::uniform(s.element_count(), s.source_pressure);
        assert!(matches!(
            pressure_at(&s, &d, &Vec3::new(0.0, 0.0, -1e-3)),
            Err(Error::BelowPlane { .. })
        ));
    }

    #[test]
    fn drive_length_mismatch_rejected() {
        let s = default_scene();
        let d = DriveState::uniform(3, s.source_pressure);
        assert!(pressure_at(&s, &d, &Vec3::new(0.0, 0.0, 0.01)).is_err());
    }

    #[test]
    fn zero_drive_grid_is_zero() {
        let s = default_scene();
        let d = DriveState::silent(s.element_count(), s.source_pressure);
        let spec = GridSpec::centered(Vec3::new(0.0, 0.0, 5.0 * MM), [2e-3; 3], [3, 3, 3]);
        let g = field_grid(&s, &d, &spec).unwrap();
        assert!(g.values.iter().all(|v| v.re == 0.0 && v.im == 0.0));
        assert!(matches!(
            focal_metrics(&g, &Vec3::zeros()),
            Err(Error::NoPeak)
        ));
    }

    #[test]
    fn single_point_grid_matches_pressure_at() {
        let s = default_scene();
        let d = focus_phases(&s, &FocusSpec::reflected(Vec3::new(0.0, 0.0, 3.0 * MM))).unwrap();
        let p = Vec3::new(1e-3, -2e-3, 4e-3);
        let g = field_grid(&s, &d, &GridSpec::axis_aligned(p, [1e-3; 3], [1, 1, 1])).unwrap();
        assert_eq!(g.values[0], pressure_at(&s, &d, &p).unwrap());
    }

    #[test]
    fn grid_crossing_plate_rejected() {
        let s = default_scene();
        let d = DriveState::uniform(s.element_count(), s.source_pressure);
        let spec = GridSpec::centered(Vec3::zeros(), [1e-3; 3], [3, 3, 3]);
        assert!(field_grid(&s, &d, &spec).is_err());
    }

    #[test]
    fn synthetic_peak_found() {
        let spec = GridSpec::axis_aligned(Vec3::zeros(), [1e-3; 3], [5, 4, 3]);
        let mut values = vec![Complex64::new(0.0, 0.0); spec.len()];
        let idx = spec.index(3, 1, 2);
        values[idx] = Complex64::new(0.0, 2.0);
        let g = FieldGrid::new(spec.clone(), values).unwrap();
        let m = focal_metrics(&g, &Vec3::zeros()).unwrap();
        assert_eq!(m.peak_position, spec.point(idx));
        assert_eq!(m.peak_magnitude, 2.0);
        // Drops to zero one step either side: half-max crossing at 0.5 step each way.
        assert!((m.widths[0].unwrap() - 1e-3).abs() < 1e-15);
        assert_eq!(m.widths[2], None);
    }

    #[test]
    fn zero_drive_residual_is_zero() {
        let s = default_scene();
        let d = DriveState::silent(s.element_count(), s.source_pressure);
        assert_eq!(boundary_residual(&s, &d, &[Vec3::zeros()]).unwrap(), 0.0);
    }

    struct BlockAll;
    impl OcclusionMask for BlockAll {
        fn blocks(&self, _: &Vec3, _: &Vec3) -> bool {
            true
        }
    }

    #[test]
    fn occlusion_hook_blocks_paths() {
        let s = default_scene();
        let d = DriveState::uniform(s.element_count(), s.source_pressure);
        let m = FieldModel::new(&s, &d).unwrap().with_occlusion(Arc::new(BlockAll));
        assert_eq!(m.pressure_at(&Vec3::new(0.0, 0.0, 0.01)).unwrap(), Complex64::new(0.0, 0.0));
    }
}

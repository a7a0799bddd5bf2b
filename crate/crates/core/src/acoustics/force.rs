//! Acoustic radiation force on a flat disc held above the plate.
//!
//! The disc underside and the plate form a rigid parallel pair. The field on
//! the underside is built from the plate image of every element plus a chain
//! of further images, alternately across the disc plane and the plate, which
//! produces the gap-dependent standing wave. Direct rays from the arrays hit
//! the top face and are excluded.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::drive::{DriveState, FocusSpec};
use super::field::{direct_sources, Source, SourceSet};
use super::focus_phases;
use super::sum::sum_f64;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Scene, Vec3, MM};

/// Radius of the round-bar proxy used in the force measurement.
pub const BAR_RADIUS: f64 = 5.0 * MM;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscTarget {
    pub center: Vec3,
    pub radius: f64,
    /// Outward normal of the loaded face.
    pub normal: Vec3,
}

impl DiscTarget {
    /// Disc parallel to the plate, facing it, centred `gap` above `(x, y)`.
    pub fn above_plate(scene: &Scene, xy: [f64; 2], gap: f64, radius: f64) -> Self {
        let n = scene.plane.normal;
        let foot = scene.plane.point + Vec3::new(xy[0], xy[1], 0.0);
        let foot = foot - n * scene.plane.signed_distance(&foot);
        Self {
            center: foot + n * gap,
            radius,
            normal: -n,
        }
    }
}

/// Polar product rule: Gauss-Legendre in radius, uniform in angle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscQuadrature {
    pub radial: usize,
    pub angular: usize,
}

impl Default for DiscQuadrature {
    fn default() -> Self {
        Self {
            radial: 16,
            angular: 32,
        }
    }
}

impl DiscQuadrature {
    pub fn doubled(self) -> Self {
        Self {
            radial: self.radial * 2,
            angular: self.angular * 2,
        }
    }

    /// Node offsets in the disc frame (first two axes) and area weights.
    pub fn nodes(&self, radius: f64) -> Vec<(f64, f64, f64)> {
        let (x, w) = gauss_legendre(self.radial);
        let dtheta = std::f64::consts::TAU / self.angular as f64;
        let mut out = Vec::with_capacity(self.radial * self.angular);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * radius * (xi + 1.0);
            let wr = 0.5 * radius * wi * r * dtheta;
            for a in 0..self.angular {
                let t = a as f64 * dtheta;
                out.push((r * t.cos(), r * t.sin(), wr));
            }
        }
        out
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceOptions {
    /// Extra reflections after the plate image, alternating disc then plate.
    pub bounce_order: usize,
    pub quadrature: DiscQuadrature,
    pub max_image_sources: usize,
}

impl Default for ForceOptions {
    fn default() -> Self {
        Self {
            bounce_order: 3,
            quadrature: DiscQuadrature::default(),
            max_image_sources: 1 << 16,
        }
    }
}

/// Upward force on the disc underside, `integral |p|^2 / (rho c^2) dS`.
pub fn radiation_force_disc(
    scene: &Scene,
    drive: &DriveState,
    disc: &DiscTarget,
    options: &ForceOptions,
) -> Result<f64> {
    scene.validate()?;
    drive.validate()?;
    if !(disc.radius > 0.0) {
        return Err(invalid("disc radius must be positive"));
    }
    let plane = &scene.plane;
    if disc.normal.dot(&plane.normal).abs() < 1.0 - 1e-9 {
        return Err(invalid("disc must be parallel to the plate"));
    }
    let gap = plane.signed_distance(&disc.center);
    if !(gap > 0.0) {
        return Err(invalid(format!("disc gap must be positive, got {gap}")));
    }
    let n = scene.element_count();
    let count = n * (1 + options.bounce_order);
    if count > options.max_image_sources {
        return Err(Error::TooManyImages {
            count,
            cap: options.max_image_sources,
        });
    }

    let disc_plane = plane.offset(gap, 1.0);
    let mut generation: Vec<Source> = direct_sources(scene, &drive.weights())?
        .iter()
        .map(|s| s.mirrored(plane, plane.reflection_coefficient))
        .collect();
    let mut sources = Vec::with_capacity(count);
    sources.extend_from_slice(&generation);
    for bounce in 0..options.bounce_order {
        generation = if bounce % 2 == 0 {
            generation.iter().map(|s| s.mirrored(&disc_plane, 1.0)).collect()
        } else {
            generation
                .iter()
                .map(|s| s.mirrored(plane, plane.reflection_coefficient))
                .collect()
        };
        sources.extend_from_slice(&generation);
    }
    let set = SourceSet::new(sources, scene.wavenumber(), scene.element_radius(), scene.directivity);
    disc_force(&set, disc, &options.quadrature, scene.air_density * scene.sound_speed.powi(2))
}

/// `integral |p|^2 / impedance_term dS` over the disc face for an arbitrary source set.
pub fn disc_force(
    sources: &SourceSet,
    disc: &DiscTarget,
    quadrature: &DiscQuadrature,
    rho_c2: f64,
) -> Result<f64> {
    let (u, v) = plane_basis(&disc.normal);
    let nodes = quadrature.nodes(disc.radius);
    let terms = nodes
        .par_iter()
        .map(|&(a, b, w)| {
            let p = sources.pressure(&(disc.center + u * a + v * b))?;
            Ok(w * p.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sum_f64(terms) / rho_c2)
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    (u, v)
}

/// Distance from the first array at which [`reference_force`] focuses.
pub const REFERENCE_DISTANCE: f64 = 200.0 * MM;

/// Force on a 10 mm disc facing the first array, which focuses straight at it
/// 200 mm away in free space (incident field only).
pub fn reference_force(scene: &Scene) -> Result<f64> {
    scene.validate()?;
    let mut single = scene.clone();
    single.arrays.truncate(1);
    let pose = &single.arrays[0].pose;
    let focus = pose.origin + pose.normal * REFERENCE_DISTANCE;
    let drive = focus_phases(&single, &FocusSpec::direct(focus))?;
    let set = SourceSet::new(
        direct_sources(&single, &drive.weights())?,
        single.wavenumber(),
        single.element_radius(),
        single.directivity,
    );
    let disc = DiscTarget {
        center: focus,
        radius: BAR_RADIUS,
        normal: -pose.normal,
    };
    disc_force(
        &set,
        &disc,
        &DiscQuadrature::default(),
        single.air_density * single.sound_speed.powi(2),
    )
}

/// Source pressure that makes [`reference_force`] equal `target_force`.
/// Force is quadratic in source pressure, so one evaluation suffices.
pub fn calibrate_source_pressure(scene: &Scene, target_force: f64) -> Result<f64> {
    if !(target_force > 0.0) {
        return Err(invalid("calibration force must be positive"));
    }
    let f = reference_force(scene)?;
    Ok(scene.source_pressure * (target_force / f).sqrt())
}

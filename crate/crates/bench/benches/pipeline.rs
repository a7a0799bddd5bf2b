use airbutton_core::acoustics::field_grid;
use airbutton_core::acoustics::BAR_RADIUS;
use airbutton_core::config::SensorConfig;
use airbutton_core::geometry::MM;
use airbutton_core::{
    default_scene, focus_phases, radiation_force_disc, run_session, sinusoid_trajectory,
    DiscTarget, FeedbackConfig, FocusSpec, ForceOptions, GridSpec, TouchMode, Vec3,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn field(c: &mut Criterion) {
    let scene = default_scene();
    let drive = focus_phases(&scene, &FocusSpec::reflected(Vec3::new(0.0, 0.0, 3.0 * MM))).unwrap();
    let spec = GridSpec::axis_aligned(Vec3::new(-10.0 * MM, -10.0 * MM, 0.0), [1.0 * MM; 3], [21, 21, 5]);
    c.bench_function("field_grid_21x21x5", |b| {
        b.iter(|| field_grid(black_box(&scene), &drive, &spec).unwrap())
    });
}

fn force(c: &mut Criterion) {
    let scene = default_scene();
    let drive = focus_phases(&scene, &FocusSpec::reflected(Vec3::new(0.0, 0.0, 3.0 * MM))).unwrap();
    let disc = DiscTarget::above_plate(&scene, [0.0, 0.0], 5.0 * MM, BAR_RADIUS);
    let opts = ForceOptions::default();
    c.bench_function("radiation_force_disc", |b| {
        b.iter(|| radiation_force_disc(black_box(&scene), &drive, &disc, &opts).unwrap())
    });
}

fn session(c: &mut Criterion) {
    let scene = default_scene();
    let sensor = SensorConfig::default();
    let traj = sinusoid_trajectory(5, 2.0, 10.0 * MM, TouchMode::TouchingPlate, 1000.0).unwrap();
    let fb = FeedbackConfig::default();
    c.bench_function("session_5_cycles", |b| {
        b.iter(|| run_session(black_box(&scene), &sensor, &fb, &traj).unwrap())
    });
}

criterion_group!(benches, field, force, session);
criterion_main!(benches);

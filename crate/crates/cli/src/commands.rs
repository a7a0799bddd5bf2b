use std::path::Path;

use airbutton_core::acoustics::{field_grid, focal_metrics};
use airbutton_core::geometry::MM;
use airbutton_core::harness::{add_chatter, measure_latency};
use airbutton_core::io::{
    write_commands_csv, write_events_csv, write_field_binary, write_field_csv, write_sweep_csv,
    write_trace_csv, RunManifest,
};
use airbutton_core::{
    focus_phases, run_force_sweep, run_session, sinusoid_trajectory, Config, EventKind, FocusSpec,
    GridSpec, SweepOptions, Vec3,
};
use anyhow::{bail, Context, Result};

use crate::args::{FieldArgs, FieldFormat, SessionArgs, SweepArgs};
use crate::output::Artifacts;

pub fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading scene {}", p.display())),
        None => Ok(Config::paper_default()),
    }
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> airbutton_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn manifest(command: &str, config: &Config, seed: Option<u64>, outputs: Vec<String>) -> Result<Vec<u8>> {
    Ok(RunManifest::new(command, config, seed, outputs)?.to_json()?.into_bytes())
}

pub fn sweep(config: &Config, args: &SweepArgs, seed: Option<u64>, out_dir: &Path) -> Result<String> {
    let mut opts = SweepOptions {
        amplitude: args.amplitude,
        quantize: args.quantize_scale,
        ..SweepOptions::default()
    };
    if let Some(b) = args.bounce_order {
        opts.force.bounce_order = b;
    }
    let result = run_force_sweep(&config.scene, &opts)?;
    let mut files = Artifacts::new();
    files.add("sweep.csv", csv_bytes(|b| write_sweep_csv(b, &result))?);
    let outputs = files.names();
    files.add("sweep_manifest.json", manifest("sweep", config, seed, outputs)?);
    files.commit(out_dir)?;
    let periods: Vec<String> = result
        .periods_mm()
        .into_iter()
        .map(|p| p.map_or("none".to_owned(), |v| format!("{v:.2}")))
        .collect();
    Ok(format!(
        "sweep: {} rows, quantized={}, gap period per focal height (mm): {}",
        result.len(),
        result.quantized,
        periods.join(" ")
    ))
}

pub fn session(config: &Config, args: &SessionArgs, seed: Option<u64>, out_dir: &Path) -> Result<String> {
    let mut cfg = config.clone();
    if let Some(c) = args.condition_pos.or(args.condition) {
        cfg.feedback.condition = c;
    }
    if let Some(ms) = args.burst_ms_pos.or(args.burst_ms) {
        if !cfg.feedback.allowed_burst_ms.contains(&ms) {
            bail!(
                "burst length {ms} ms is not one of the configured values {:?}",
                cfg.feedback.allowed_burst_ms
            );
        }
        cfg.feedback.burst_ms = ms;
    }
    if let Some(hz) = args.sampling_hz {
        cfg.sensor.sampling_hz = hz;
    }
    if let Some(t) = args.touch {
        cfg.session.touch_mode = t.into();
    }
    if let Some(n) = args.cycles {
        cfg.session.cycles = n;
    }
    if let Some(p) = args.period_s {
        cfg.session.period_s = p;
    }
    if let Some(a) = args.amplitude_mm {
        cfg.session.amplitude = a * MM;
    }
    cfg.validate()?;
    cfg.sensor.check_latency_budget()?;

    let s = &cfg.session;
    let mut traj = sinusoid_trajectory(s.cycles, s.period_s, s.amplitude, s.touch_mode, cfg.sensor.sampling_hz)?;
    let chatter_seed = args.chatter_seed.or(seed);
    if let Some(seed) = chatter_seed {
        let noise = match args.chatter_um {
            Some(um) => um * 1e-6,
            None => {
                let beam = cfg.sensor.beam(&cfg.scene);
                0.9 * cfg.sensor.thresholds.band() / 2.0 / beam.max_voltage_slope()
            }
        };
        traj = add_chatter(&traj, noise, seed)?;
    }
    let fb = cfg.feedback.to_config();
    let log = run_session(&cfg.scene, &cfg.sensor, &fb, &traj)?;
    log.check_consistency(fb.condition)?;
    let latency = match measure_latency(&log, cfg.sensor.sampling_period()) {
        Ok(r) => Some(r),
        Err(airbutton_core::Error::NoData) => None,
        Err(e) => return Err(e.into()),
    };
    if let Some(r) = &latency {
        if !r.within_budget {
            bail!(
                "latency {:.3} ms exceeds one sampling period of {:.3} ms",
                r.max_latency * 1e3,
                r.sampling_period * 1e3
            );
        }
    }

    let mut files = Artifacts::new();
    files.add("session_events.csv", csv_bytes(|b| write_events_csv(b, &log.events))?);
    files.add("session_commands.csv", csv_bytes(|b| write_commands_csv(b, &log.commands))?);
    files.add("session_trace.csv", csv_bytes(|b| write_trace_csv(b, &log.trace))?);
    let outputs = files.names();
    files.add("session_manifest.json", manifest("session", &cfg, chatter_seed, outputs)?);
    files.commit(out_dir)?;

    Ok(format!(
        "session: condition={} burst_ms={} touch={} events={} (down {}, up {}) commands={} max_latency_ms={}",
        fb.condition,
        cfg.feedback.burst_ms,
        s.touch_mode.as_str(),
        log.events.len(),
        log.count(EventKind::Down),
        log.count(EventKind::Up),
        log.commands.len(),
        latency.map_or("n/a".to_owned(), |r| format!("{:.3}", r.max_latency * 1e3)),
    ))
}

pub fn field(config: &Config, args: &FieldArgs, seed: Option<u64>, out_dir: &Path) -> Result<String> {
    let focal = args.focal_mm.map_or(config.feedback.focal_height, |h| h * MM);
    let xy = config.feedback.focal_xy;
    let target = Vec3::new(xy[0], xy[1], focal);
    let h = args.spacing_mm * MM;
    if !(h > 0.0 && args.extent_mm >= 0.0 && args.height_mm >= 0.0) {
        bail!("grid spacing must be positive and extents non-negative");
    }
    let n_xy = (2.0 * args.extent_mm / args.spacing_mm).round() as usize + 1;
    let n_z = (args.height_mm / args.spacing_mm).round() as usize + 1;
    let half = (n_xy - 1) as f64 / 2.0 * h;
    let spec = GridSpec::axis_aligned(Vec3::new(xy[0] - half, xy[1] - half, 0.0), [h; 3], [n_xy, n_xy, n_z]);
    let drive = focus_phases(&config.scene, &FocusSpec::reflected(target))?;
    let grid = field_grid(&config.scene, &drive, &spec)?;
    let m = focal_metrics(&grid, &target)?;

    let mut files = Artifacts::new();
    if matches!(args.format, FieldFormat::Csv | FieldFormat::Both) {
        files.add("field.csv", csv_bytes(|b| write_field_csv(b, &grid))?);
    }
    if matches!(args.format, FieldFormat::Bin | FieldFormat::Both) {
        files.add("field.bin", csv_bytes(|b| write_field_binary(b, &grid))?);
    }
    let outputs = files.names();
    files.add("field_manifest.json", manifest("field", config, seed, outputs)?);
    files.commit(out_dir)?;
    Ok(format!(
        "field: {} points, peak {:.1} Pa at ({:.1}, {:.1}, {:.1}) mm, {:.2} mm from target",
        grid.values.len(),
        m.peak_magnitude,
        m.peak_position.x / MM,
        m.peak_position.y / MM,
        m.peak_position.z / MM,
        m.distance_to_target / MM
    ))
}

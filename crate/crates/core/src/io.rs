//! File formats. CSV writers print floats with Rust's shortest round-trip
//! formatting, so equal values always give equal bytes.
//!
//! Binary field layout, all little-endian:
//!
//! ```text
//! magic    4 bytes  "ABFG"
//! version  u32      1
//! dims     3 x u64
//! origin   3 x f64  metres
//! axes     9 x f64  three unit vectors
//! spacing  3 x f64  metres
//! values   dims product x (re f64, im f64), first axis fastest
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::acoustics::{FieldGrid, GridSpec};
use crate::config::Config;
use crate::controller::FocusCommand;
use crate::error::{Error, Result};
use crate::geometry::{Vec3, MM};
use crate::harness::SweepResult;
use crate::sensing::{ButtonEvent, EventKind};

pub const FIELD_MAGIC: &[u8; 4] = b"ABFG";
pub const FIELD_VERSION: u32 = 1;

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn reader<R: Read>(r: R, header: &[&str]) -> Result<csv::Reader<R>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let got: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_owned()).collect();
    if got != header {
        return Err(Error::Format(format!("expected columns {header:?}, got {got:?}")));
    }
    Ok(rdr)
}

fn num(field: Option<&str>) -> Result<f64> {
    let s = field.ok_or_else(|| Error::Format("missing column".into()))?;
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("not a number: {s:?}")))
}

/// Scale to milli-units and round to 1e-9 of them, so that e.g. 3 * 0.001 m
/// prints as 3 and quantised forces print on their 0.98 mN steps.
fn milli(x: f64) -> String {
    ((x * 1e12).round() / 1e9).to_string()
}


pub const SWEEP_HEADER: [&str; 3] = ["gap_mm", "focal_height_mm", "force_mN"];

/// One row per cell, gap outermost.
pub fn write_sweep_csv<W: Write>(w: W, sweep: &SweepResult) -> Result<()> {
    let mut out = writer(w, &SWEEP_HEADER)?;
    for (g, row) in sweep.gaps.iter().zip(&sweep.forces) {
        for (h, f) in sweep.focal_heights.iter().zip(row) {
            out.write_record([
                milli(*g),
                milli(*h),
                milli(*f),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rows as written: (gap mm, focal height mm, force mN).
pub fn read_sweep_csv<R: Read>(r: R) -> Result<Vec<(f64, f64, f64)>> {
    let mut rdr = reader(r, &SWEEP_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((num(rec.get(0))?, num(rec.get(1))?, num(rec.get(2))?))
        })
        .collect()
}

pub const EVENTS_HEADER: [&str; 3] = ["time_s", "kind", "volts"];

pub fn write_events_csv<W: Write>(w: W, events: &[ButtonEvent]) -> Result<()> {
    let mut out = writer(w, &EVENTS_HEADER)?;
    for e in events {
        out.write_record([e.time.to_string(), e.kind.as_str().to_owned(), e.voltage.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(r: R) -> Result<Vec<ButtonEvent>> {
    let mut rdr = reader(r, &EVENTS_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let kind: EventKind = rec
                .get(1)
                .ok_or_else(|| Error::Format("missing column".into()))?
                .trim()
                .parse()?;
            Ok(ButtonEvent {
                time: num(rec.get(0))?,
                kind,
                voltage: num(rec.get(2))?,
            })
        })
        .collect()
}

pub const COMMANDS_HEADER: [&str; 5] = ["start_s", "duration_s", "x_mm", "y_mm", "z_mm"];

pub fn write_commands_csv<W: Write>(w: W, commands: &[FocusCommand]) -> Result<()> {
    let mut out = writer(w, &COMMANDS_HEADER)?;
    for c in commands {
        out.write_record([
            c.start.to_string(),
            c.duration.to_string(),
            milli(c.target.x),
            milli(c.target.y),
            milli(c.target.z),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Commands read back at full amplitude.
pub fn read_commands_csv<R: Read>(r: R) -> Result<Vec<FocusCommand>> {
    let mut rdr = reader(r, &COMMANDS_HEADER)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(FocusCommand {
                start: num(rec.get(0))?,
                duration: num(rec.get(1))?,
                target: Vec3::new(num(rec.get(2))?, num(rec.get(3))?, num(rec.get(4))?) * MM,
                amplitude: 1.0,
            })
        })
        .collect()
}

pub const TRACE_HEADER: [&str; 2] = ["time_s", "volts"];

pub fn write_trace_csv<W: Write>(w: W, trace: &[(f64, f64)]) -> Result<()> {
    let mut out = writer(w, &TRACE_HEADER)?;
    for (t, v) in trace {
        out.write_record([t.to_string(), v.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(r, &TRACE_HEADER)?;
    let trace: Vec<(f64, f64)> = rdr
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok((num(rec.get(0))?, num(rec.get(1))?))
        })
        .collect::<Result<_>>()?;
    if trace.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Format("trace times must be strictly increasing".into()));
    }
    Ok(trace)
}

pub const FIELD_HEADER: [&str; 6] = ["x", "y", "z", "re", "im", "abs"];

/// Positions in metres, pressures in pascals.
pub fn write_field_csv<W: Write>(w: W, grid: &FieldGrid) -> Result<()> {
    let mut out = writer(w, &FIELD_HEADER)?;
    for (i, v) in grid.values.iter().enumerate() {
        let p = grid.spec.point(i);
        out.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.z.to_string(),
            v.re.to_string(),
            v.im.to_string(),
            v.norm().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_field_binary<W: Write>(mut w: W, grid: &FieldGrid) -> Result<()> {
    let s = &grid.spec;
    let mut buf = Vec::with_capacity(4 + 4 + 24 + 8 * 15 + grid.values.len() * 16);
    buf.extend_from_slice(FIELD_MAGIC);
    buf.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    for d in s.dims {
        buf.extend_from_slice(&(d as u64).to_le_bytes());
    }
    let vectors = std::iter::once(&s.origin).chain(&s.axes);
    for v in vectors {
        for c in v.iter() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    for h in s.spacing {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    for v in &grid.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_field_binary<R: Read>(mut r: R) -> Result<FieldGrid> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let end = pos + n;
        let slice = bytes
            .get(pos..end)
            .ok_or_else(|| Error::Format("field file truncated".into()))?;
        pos = end;
        Ok(slice)
    };
    if take(4)? != FIELD_MAGIC {
        return Err(Error::Format("not a field file".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != FIELD_VERSION {
        return Err(Error::Format(format!("unsupported field version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(u64::from_le_bytes(take(8)?.try_into().unwrap()))
            .map_err(|_| Error::Format("grid too large".into()))?;
    }
    let mut f64s = |n: usize| -> Result<Vec<f64>> {
        (0..n)
            .map(|_| Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())))
            .collect()
    };
    let head = f64s(15)?;
    let vec3 = |i: usize| Vec3::new(head[i], head[i + 1], head[i + 2]);
    let spec = GridSpec {
        origin: vec3(0),
        axes: [vec3(3), vec3(6), vec3(9)],
        spacing: [head[12], head[13], head[14]],
        dims,
    };
    spec.validate()?;
    let n = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .ok_or_else(|| Error::Format("grid too large".into()))?;
    let raw = f64s(n.checked_mul(2).ok_or_else(|| Error::Format("grid too large".into()))?)?;
    if pos != bytes.len() {
        return Err(Error::Format("trailing bytes after field values".into()));
    }
    let values = raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    FieldGrid::new(spec, values)
}

/// What is needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scene_hash: String,
    pub seed: Option<u64>,
    pub version: String,
    pub config: Config,
    /// Output file names relative to the manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &Config, seed: Option<u64>, outputs: Vec<String>) -> Result<Self> {
        Ok(Self {
            command: command.to_owned(),
            scene_hash: config.scene_hash()?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            config: config.clone(),
            outputs,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid() -> FieldGrid {
        let spec = GridSpec::axis_aligned(Vec3::new(-1e-3, 0.0, 2e-3), [1e-3, 2e-3, 0.5e-3], [2, 3, 2]);
        let values = (0..spec.len())
            .map(|i| Complex64::new(i as f64 * 0.1, -(i as f64) / 3.0))
            .collect();
        FieldGrid::new(spec, values).unwrap()
    }

    #[test]
    fn field_binary_round_trip_is_exact() {
        let g = sample_grid();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &g).unwrap();
        assert_eq!(buf.len(), 8 + 24 + 120 + g.values.len() * 16);
        assert_eq!(read_field_binary(&buf[..]).unwrap(), g);
    }

    #[test]
    fn field_binary_rejects_damage() {
        let g = sample_grid();
        let mut buf = Vec::new();
        write_field_binary(&mut buf, &g).unwrap();
        assert!(read_field_binary(&buf[..buf.len() - 1]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_field_binary(&bad[..]).is_err());
        let mut long = buf;
        long.push(0);
        assert!(read_field_binary(&long[..]).is_err());
    }

    #[test]
    fn field_csv_columns() {
        let g = sample_grid();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,y,z,re,im,abs");
        assert_eq!(lines.count(), g.values.len());
    }

    #[test]
    fn events_round_trip() {
        let ev = vec![
            ButtonEvent { kind: EventKind::Down, time: 0.25, voltage: 1.9 },
            ButtonEvent { kind: EventKind::Up, time: 1.0 / 3.0, voltage: 3.05 },
        ];
        let mut buf = Vec::new();
        write_events_csv(&mut buf, &ev).unwrap();
        assert_eq!(read_events_csv(&buf[..]).unwrap(), ev);
    }

    #[test]
    fn commands_round_trip() {
        let cmds = vec![FocusCommand {
            target: Vec3::new(0.0, 0.0, 3.0 * MM),
            start: 0.5,
            duration: 0.1,
            amplitude: 1.0,
        }];
        let mut buf = Vec::new();
        write_commands_csv(&mut buf, &cmds).unwrap();
        let back = read_commands_csv(&buf[..]).unwrap();
        assert_eq!(back[0].start, 0.5);
        assert!((back[0].target.z - 3.0 * MM).abs() < 1e-15);
    }

    #[test]
    fn trace_round_trip_and_validation() {
        let trace = vec![(0.0, 5.0), (0.001, 4.5), (0.002, 0.1)];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        assert_eq!(read_trace_csv(&buf[..]).unwrap(), trace);
        assert!(read_trace_csv("time_s,volts\n0.1,1\n0.1,2\n".as_bytes()).is_err());
        assert!(read_trace_csv("t,v\n0,1\n".as_bytes()).is_err());
        assert!(read_trace_csv("time_s,volts\n0,abc\n".as_bytes()).is_err());
    }

    #[test]
    fn sweep_csv_rows() {
        let s = SweepResult {
            gaps: vec![1e-3, 2e-3],
            focal_heights: vec![3e-3],
            forces: vec![vec![0.01], vec![0.02]],
            quantized: false,
        };
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &s).unwrap();
        let rows = read_sweep_csv(&buf[..]).unwrap();
        assert_eq!(rows, vec![(1.0, 3.0, 10.0), (2.0, 3.0, 20.0)]);
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest::new("sweep", &Config::paper_default(), Some(7), vec!["sweep.csv".into()]).unwrap();
        assert_eq!(RunManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }
}

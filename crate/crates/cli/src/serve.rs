//! Live service. One owner task advances the pipeline on a fixed tick and
//! broadcasts each frame; websocket tasks only forward frames out and inputs
//! in over channels.

use std::future::Future;
use std::io::{BufRead, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use airbutton_core::acoustics::field_grid;
use airbutton_core::geometry::MM;
use airbutton_core::live::{replay, ClientMessage, RecordedInput, ServerMessage};
use airbutton_core::{focus_phases, Config, FocusSpec, GridSpec, InputMessage, LivePipeline, Thresholds, Vec3};
use anyhow::{anyhow, Context, Result};
use axum::extract::ws::{Message, Utf8Bytes, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, watch};

use crate::output::Artifacts;

#[derive(Clone, Debug)]
pub struct ServeConfig {
    pub config: Config,
    pub tick_hz: f64,
    pub initial_height: f64,
    pub record: Option<PathBuf>,
    /// Stop after this many ticks.
    pub ticks: Option<u64>,
}

/// Pressure magnitude on a horizontal plane through the focus, x fastest.
#[derive(Clone, Debug, Serialize)]
pub struct FieldSlice {
    pub z: f64,
    pub x0: f64,
    pub y0: f64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub magnitude: Vec<f64>,
}

pub fn field_slice(config: &Config, half_extent: f64, spacing: f64) -> Result<FieldSlice> {
    let [x, y] = config.feedback.focal_xy;
    let z = config.feedback.focal_height;
    let n = (2.0 * half_extent / spacing).round() as usize + 1;
    let half = (n - 1) as f64 / 2.0 * spacing;
    let spec = GridSpec::axis_aligned(Vec3::new(x - half, y - half, z), [spacing; 3], [n, n, 1]);
    let drive = focus_phases(&config.scene, &FocusSpec::reflected(Vec3::new(x, y, z)))?;
    let grid = field_grid(&config.scene, &drive, &spec)?;
    Ok(FieldSlice {
        z,
        x0: x - half,
        y0: y - half,
        spacing,
        nx: n,
        ny: n,
        magnitude: grid.values.iter().map(|v| v.norm()).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ServiceInfo {
    pub tick_hz: f64,
    pub thresholds: Thresholds,
    pub condition: String,
    pub burst_ms: f64,
    pub beam_height: f64,
    pub initial_height: f64,
}

#[derive(Clone)]
struct AppState {
    frames: broadcast::Sender<Utf8Bytes>,
    inputs: mpsc::Sender<InputMessage>,
    stop: watch::Receiver<bool>,
    field: Arc<FieldSlice>,
    info: Arc<ServiceInfo>,
}

pub struct Server {
    listener: TcpListener,
    cfg: ServeConfig,
    field: Arc<FieldSlice>,
}

/// Validate the configuration, precompute the heatmap and bind
/// `127.0.0.1:port` (0 picks a free port).
pub async fn bind(cfg: ServeConfig, port: u16) -> Result<Server> {
    cfg.config.validate()?;
    if !(cfg.tick_hz > 0.0) {
        return Err(anyhow!("tick rate must be positive"));
    }
    let period = 1.0 / cfg.tick_hz;
    if period > airbutton_core::LATENCY_BUDGET {
        return Err(anyhow!(
            "tick period {:.1} ms exceeds the {:.0} ms latency budget",
            period * 1e3,
            airbutton_core::LATENCY_BUDGET * 1e3
        ));
    }
    // Fail on a bad initial height before binding.
    LivePipeline::new(&cfg.config, cfg.tick_hz, cfg.initial_height)?;
    let config = cfg.config.clone();
    let field = tokio::task::spawn_blocking(move || field_slice(&config, 40.0 * MM, 1.0 * MM)).await??;
    let listener = TcpListener::bind((Ipv4Addr::LOCALHOST, port)).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            anyhow!("port {port} is already in use")
        } else {
            anyhow!("cannot listen on port {port}: {e}")
        }
    })?;
    Ok(Server {
        listener,
        cfg,
        field: Arc::new(field),
    })
}

impl Server {
    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Serve until `shutdown` resolves or the tick limit is reached.
    pub async fn run(self, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<()> {
        let Server { listener, cfg, field } = self;
        let (frames, _) = broadcast::channel::<Utf8Bytes>(1024);
        let (input_tx, input_rx) = mpsc::channel::<InputMessage>(256);
        let (stop_tx, stop_rx) = watch::channel(false);
        let info = ServiceInfo {
            tick_hz: cfg.tick_hz,
            thresholds: cfg.config.sensor.thresholds,
            condition: cfg.config.feedback.condition.to_string(),
            burst_ms: cfg.config.feedback.burst_ms,
            beam_height: cfg.config.scene.beam_height,
            initial_height: cfg.initial_height,
        };
        let state = AppState {
            frames: frames.clone(),
            inputs: input_tx,
            stop: stop_rx.clone(),
            field,
            info: Arc::new(info),
        };
        let app = Router::new()
            .route("/ws", get(ws_handler))
            .route("/field-slice", get(field_handler))
            .route("/config", get(info_handler))
            .with_state(state);

        let owner = tokio::spawn(owner_loop(cfg, frames, input_rx, stop_rx.clone(), stop_tx.clone()));
        let stop_signal = stop_tx.clone();
        tokio::spawn(async move {
            shutdown.await;
            let _ = stop_signal.send(true);
        });
        let mut wait_stop = stop_rx;
        log::info!("listening on ws://{}/ws", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async move { stopped(&mut wait_stop).await })
            .await?;
        let _ = stop_tx.send(true);
        owner.await?
    }
}

async fn owner_loop(
    cfg: ServeConfig,
    frames: broadcast::Sender<Utf8Bytes>,
    mut inputs: mpsc::Receiver<InputMessage>,
    mut stop: watch::Receiver<bool>,
    finished: watch::Sender<bool>,
) -> Result<()> {
    let mut pipeline = LivePipeline::new(&cfg.config, cfg.tick_hz, cfg.initial_height)?;
    let mut record = match &cfg.record {
        Some(p) => Some(std::io::LineWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let mut interval = tokio::time::interval(Duration::from_secs_f64(1.0 / cfg.tick_hz));
    interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Burst);
    let mut tick: u64 = 0;
    loop {
        if cfg.ticks.is_some_and(|n| tick >= n) {
            break;
        }
        tokio::select! {
            _ = interval.tick() => {}
            _ = stopped(&mut stop) => break,
        }
        let mut latest = None;
        while let Ok(msg) = inputs.try_recv() {
            latest = Some(msg);
        }
        if let (Some(w), Some(msg)) = (record.as_mut(), latest.as_ref()) {
            let line = serde_json::to_string(&RecordedInput {
                tick,
                finger_height_m: msg.finger_height_m,
            })?;
            writeln!(w, "{line}")?;
        }
        let frame = pipeline.step(latest.as_ref())?;
        if let Some(e) = &frame.last_event {
            log::debug!("{} at {:.3} s", e.kind.as_str(), e.time);
        }
        let text = serde_json::to_string(&ServerMessage::Frame(frame))?;
        // No subscribers is fine; frames are simply not delivered.
        let _ = frames.send(Utf8Bytes::from(text));
        tick += 1;
    }
    if let Some(mut w) = record {
        w.flush()?;
    }
    // Reaching the tick limit ends the whole service.
    let _ = finished.send(true);
    Ok(())
}

async fn stopped(rx: &mut watch::Receiver<bool>) {
    let _ = rx.wait_for(|s| *s).await;
}

async fn ws_handler(ws: WebSocketUpgrade, State(state): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| client(socket, state))
}

async fn client(mut socket: WebSocket, state: AppState) {
    let mut frames = state.frames.subscribe();
    let mut stop = state.stop.clone();
    loop {
        tokio::select! {
            frame = frames.recv() => match frame {
                Ok(text) => {
                    if socket.send(Message::Text(text)).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => log::warn!("client fell behind by {n} frames"),
                Err(broadcast::error::RecvError::Closed) => break,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => {
                    if let Err(e) = forward_input(&state, text.as_str()).await {
                        let reply = ServerMessage::Error { message: e.to_string() };
                        let Ok(json) = serde_json::to_string(&reply) else { break };
                        if socket.send(Message::Text(json.into())).await.is_err() {
                            break;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
            _ = stopped(&mut stop) => {
                // Deliver frames already broadcast before closing.
                while let Ok(text) = frames.try_recv() {
                    if socket.send(Message::Text(text)).await.is_err() {
                        return;
                    }
                }
                let _ = socket.send(Message::Close(None)).await;
                break;
            }
        }
    }
}

async fn forward_input(state: &AppState, text: &str) -> Result<()> {
    let ClientMessage::Input(msg) = serde_json::from_str(text).context("malformed message")?;
    msg.validate()?;
    state
        .inputs
        .send(msg)
        .await
        .map_err(|_| anyhow!("pipeline has stopped"))
}

async fn field_handler(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.field.as_ref().clone())
}

async fn info_handler(State(state): State<AppState>) -> impl IntoResponse {
    Json(state.info.as_ref().clone())
}

pub fn read_recording(path: &Path) -> Result<Vec<RecordedInput>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    std::io::BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            serde_json::from_str(&line?).with_context(|| format!("{}:{}", path.display(), i + 1))
        })
        .collect()
}

/// Offline replay of a recorded input log. Frames are serialised exactly
/// as the live service sends them, one per line.
pub fn replay_to_jsonl(cfg: &ServeConfig, inputs: &[RecordedInput], ticks: u64) -> Result<Vec<u8>> {
    let frames = replay(&cfg.config, cfg.tick_hz, cfg.initial_height, inputs, ticks)?;
    let mut out = Vec::new();
    for f in frames {
        serde_json::to_writer(&mut out, &ServerMessage::Frame(f))?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn replay_command(cfg: &ServeConfig, recording: &Path, ticks: u64, out_dir: &Path) -> Result<String> {
    let inputs = read_recording(recording)?;
    let mut files = Artifacts::new();
    files.add("frames.jsonl", replay_to_jsonl(cfg, &inputs, ticks)?);
    files.commit(out_dir)?;
    Ok(format!("replay: {ticks} frames from {} inputs", inputs.len()))
}

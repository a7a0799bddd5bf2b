use std::time::Duration;

use airbutton_cli::serve::{bind, read_recording, replay_to_jsonl, ServeConfig};
use airbutton_core::live::{ServerMessage, TickFrame};
use airbutton_core::{Config, EventKind};
use futures::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::sync::oneshot;
use tokio_tungstenite::tungstenite::Message;

fn cfg(record: Option<std::path::PathBuf>, ticks: Option<u64>) -> ServeConfig {
    ServeConfig {
        config: Config::paper_default(),
        tick_hz: 250.0,
        initial_height: 0.02,
        record,
        ticks,
    }
}

struct Running {
    addr: std::net::SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<anyhow::Result<()>>,
}

impl Running {
    async fn start(cfg: ServeConfig) -> Self {
        let server = bind(cfg, 0).await.unwrap();
        let addr = server.local_addr().unwrap();
        let (tx, rx) = oneshot::channel::<()>();
        let task = tokio::spawn(server.run(async {
            let _ = rx.await;
        }));
        Self {
            addr,
            stop: Some(tx),
            task,
        }
    }

    async fn stop(mut self) {
        let _ = self.stop.take().unwrap().send(());
        tokio::time::timeout(Duration::from_secs(5), self.task)
            .await
            .expect("graceful shutdown")
            .unwrap()
            .unwrap();
    }
}

type Ws = tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>;

async fn connect(addr: std::net::SocketAddr) -> Ws {
    let (ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    ws
}

/// Next frame as raw text plus parsed form.
async fn next_frame(ws: &mut Ws) -> (String, TickFrame) {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next())
            .await
            .expect("frame within 5 s")
            .unwrap()
            .unwrap();
        if let Message::Text(t) = msg {
            match serde_json::from_str::<ServerMessage>(&t).unwrap() {
                ServerMessage::Frame(f) => return (t.to_string(), f),
                ServerMessage::Error { message } => panic!("server error: {message}"),
            }
        }
    }
}

async fn send_height(ws: &mut Ws, h: f64) {
    let msg = format!(r#"{{"type":"input","finger_height_m":{h}}}"#);
    ws.send(Message::Text(msg.into())).await.unwrap();
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn idle_stream_holds_height_and_ticks_evenly() {
    let s = Running::start(cfg(None, None)).await;
    let mut ws = connect(s.addr).await;
    let mut prev: Option<TickFrame> = None;
    for _ in 0..50 {
        let (_, f) = next_frame(&mut ws).await;
        assert_eq!(f.finger_height, 0.02);
        assert!(f.last_event.is_none());
        assert!(f.active_burst.is_none());
        assert_eq!(f.thresholds.press, 2.0);
        if let Some(p) = prev {
            assert_eq!(f.tick, p.tick + 1, "gap in frame stream");
            assert!(f.time > p.time);
        }
        prev = Some(f);
    }
    s.stop().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn lowering_through_beam_marks_one_down() {
    let s = Running::start(cfg(None, None)).await;
    let mut ws = connect(s.addr).await;
    next_frame(&mut ws).await;
    let mut downs = Vec::new();
    for step in 0..=20 {
        let h = 0.01 - step as f64 * 0.0005;
        send_height(&mut ws, h.max(0.0)).await;
        for _ in 0..3 {
            let (_, f) = next_frame(&mut ws).await;
            if let Some(e) = f.last_event {
                assert_eq!(e.kind, EventKind::Down);
                assert!(f.active_burst.is_some());
                downs.push(f.tick);
            }
        }
    }
    assert_eq!(downs.len(), 1);
    s.stop().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn two_clients_see_identical_frames() {
    let s = Running::start(cfg(None, None)).await;
    let mut a = connect(s.addr).await;
    let mut b = connect(s.addr).await;
    send_height(&mut a, 0.0).await;
    let mut fa = Vec::new();
    let mut fb = Vec::new();
    for _ in 0..60 {
        fa.push(next_frame(&mut a).await.0);
        fb.push(next_frame(&mut b).await.0);
    }
    // Align on the first tick both have seen.
    let tick = |s: &String| serde_json::from_str::<serde_json::Value>(s).unwrap()["tick"].as_u64().unwrap();
    let start = tick(&fa[0]).max(tick(&fb[0]));
    let fa: Vec<_> = fa.into_iter().filter(|f| tick(f) >= start).collect();
    let fb: Vec<_> = fb.into_iter().filter(|f| tick(f) >= start).collect();
    let n = fa.len().min(fb.len());
    assert!(n > 40);
    assert_eq!(fa[..n], fb[..n]);
    s.stop().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn port_in_use_is_a_startup_error() {
    let s = Running::start(cfg(None, None)).await;
    let err = bind(cfg(None, None), s.addr.port()).await.err().expect("second bind must fail");
    assert!(err.to_string().contains("in use"), "{err}");
    s.stop().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn bad_input_gets_an_error_reply() {
    let s = Running::start(cfg(None, None)).await;
    let mut ws = connect(s.addr).await;
    send_height(&mut ws, -0.01).await;
    let mut saw_error = false;
    for _ in 0..100 {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.unwrap().unwrap().unwrap();
        if let Message::Text(t) = msg {
            if let ServerMessage::Error { .. } = serde_json::from_str(&t).unwrap() {
                saw_error = true;
                break;
            }
        }
    }
    assert!(saw_error);
    s.stop().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn recorded_session_replays_to_identical_frames() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("inputs.jsonl");
    let ticks = 150;
    let s = Running::start(cfg(Some(rec.clone()), Some(ticks))).await;
    let mut ws = connect(s.addr).await;
    let mut live = Vec::new();
    let heights = [0.008, 0.004, 0.001, 0.0, 0.002, 0.005, 0.012];
    let mut i = 0;
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.unwrap();
        let Some(Ok(Message::Text(t))) = msg else { break };
        live.push(t.to_string());
        if live.len() % 10 == 0 && i < heights.len() {
            send_height(&mut ws, heights[i]).await;
            i += 1;
        }
    }
    s.task.await.unwrap().unwrap();
    let inputs = read_recording(&rec).unwrap();
    assert!(!inputs.is_empty());
    let offline = String::from_utf8(replay_to_jsonl(&cfg(None, None), &inputs, ticks).unwrap()).unwrap();
    let offline: Vec<&str> = offline.lines().collect();
    assert_eq!(offline.len(), ticks as usize);
    // The client may have joined after the first few ticks.
    let first = serde_json::from_str::<serde_json::Value>(&live[0]).unwrap()["tick"].as_u64().unwrap() as usize;
    assert_eq!(live.len(), offline.len() - first);
    for (l, o) in live.iter().zip(&offline[first..]) {
        assert_eq!(l, o);
    }
    assert!(live.iter().any(|f| f.contains(r#""kind":"down""#)));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn field_slice_endpoint_serves_heatmap() {
    let s = Running::start(cfg(None, None)).await;
    let mut stream = tokio::net::TcpStream::connect(s.addr).await.unwrap();
    stream
        .write_all(b"GET /field-slice HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut raw = Vec::new();
    stream.read_to_end(&mut raw).await.unwrap();
    let text = String::from_utf8(raw).unwrap();
    assert!(text.starts_with("HTTP/1.1 200"));
    let body = &text[text.find("\r\n\r\n").unwrap() + 4..];
    let v: serde_json::Value = serde_json::from_str(body).unwrap();
    let (nx, ny) = (v["nx"].as_u64().unwrap(), v["ny"].as_u64().unwrap());
    assert_eq!((nx, ny), (81, 81));
    assert_eq!(v["magnitude"].as_array().unwrap().len() as u64, nx * ny);
    s.stop().await;
}

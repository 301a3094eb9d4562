//! WebSocket event service.
//!
//! One dispatch thread owns the registry and its simulated Joy-Con. Decoded
//! messages go into a broadcast channel; every WebSocket client gets its own
//! receiver, sees `hello` first and then the shared stream. A client that
//! falls more than [`QUEUE_BOUND`] messages behind is disconnected.

use std::future::Future;
use std::io::Read;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use hidwire::device::{DeviceId, Dispatcher, PermissionStore, Registry, RegistryHandle};
use hidwire::joycon::{self, JoyConSide};
use hidwire::jump::JumpConfig;
use hidwire::sim;
use hidwire::stream::{attach_joycon, ClientMessage, ServerMessage};
use hidwire::transport::{ReplayRecord, SimTransport};
use tokio::net::TcpListener;
use tokio::sync::broadcast;

use crate::CliError;

pub const QUEUE_BOUND: usize = 1024;

/// Virtual-time replay holds back while the slowest client is this far
/// behind. After one wait of [`BACKPRESSURE_WAIT`] runs out, a client is
/// taken to be stuck and replay runs freely until the queue drains.
const BACKPRESSURE_HIGH_WATER: usize = QUEUE_BOUND / 2;
const BACKPRESSURE_WAIT: Duration = Duration::from_secs(1);
/// A client whose socket accepts nothing for this long is dropped.
const SEND_TIMEOUT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone)]
pub enum Source {
    /// Serve whatever is injected; nothing is by default.
    Idle,
    Replay(Vec<ReplayRecord>),
    /// Each space read from stdin injects an A press and a jump.
    StdinSim,
}

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub source: Source,
    pub realtime: bool,
    pub wait_clients: usize,
    pub jump: JumpConfig,
    pub side: JoyConSide,
    pub permission_store: Option<PathBuf>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        ServeOptions {
            source: Source::Idle,
            realtime: false,
            wait_clients: 1,
            jump: JumpConfig::default(),
            side: JoyConSide::Right,
            permission_store: None,
        }
    }
}

type Feed = broadcast::Sender<Arc<str>>;

pub async fn bind(port: u16) -> Result<TcpListener, CliError> {
    TcpListener::bind(("127.0.0.1", port)).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            CliError::PortInUse(port)
        } else {
            CliError::Failure(format!("bind port {port}: {e}"))
        }
    })
}

/// Serves until `shutdown` resolves.
pub async fn run(
    listener: TcpListener,
    options: ServeOptions,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), CliError> {
    let (feed, _) = broadcast::channel::<Arc<str>>(QUEUE_BOUND);
    let (handle, device) = start_registry(&options, feed.clone())?;

    let driver_feed = feed.clone();
    let ServeOptions {
        source,
        realtime,
        wait_clients,
        ..
    } = options;
    thread::Builder::new()
        .name("hidwire-source".into())
        .spawn(move || match source {
            Source::Idle => {}
            Source::Replay(records) => drive_replay(&handle, device, &records, realtime, wait_clients, &driver_feed),
            Source::StdinSim => drive_stdin(&handle, device),
        })
        .map_err(|e| CliError::Failure(e.to_string()))?;

    if let Ok(addr) = listener.local_addr() {
        log::info!("serving on ws://{addr}/");
    }
    let app = Router::new().route("/", get(upgrade)).with_state(feed);
    axum::serve(listener, app)
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| CliError::Failure(e.to_string()))
}

fn start_registry(options: &ServeOptions, feed: Feed) -> Result<(RegistryHandle<SimTransport>, DeviceId), CliError> {
    let store = options
        .permission_store
        .as_deref()
        .map(PermissionStore::load)
        .unwrap_or_default();
    let mut registry = Registry::with_store(SimTransport::new(), store);
    let device = registry.connect(joycon::device_info(options.side));
    attach_joycon(&mut registry, device, options.jump, move |message: ServerMessage| {
        // No receivers is fine: nobody is listening yet.
        let _ = feed.send(message.to_json().into());
    })
    .map_err(|e| CliError::Failure(e.to_string()))?;
    if let Some(path) = &options.permission_store {
        registry
            .permissions()
            .save(path)
            .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    }
    Ok((Dispatcher::spawn(registry), device))
}

fn inject(handle: &RegistryHandle<SimTransport>, device: DeviceId, record: ReplayRecord) {
    let result = handle.call(move |registry| {
        registry.transport_mut().clock.advance_to(record.t_ms);
        registry.inject_input_report(device, record.report_id, &record.data)
    });
    if let Err(e) = result {
        log::warn!("inject failed: {e}");
    }
}

fn drive_replay(
    handle: &RegistryHandle<SimTransport>,
    device: DeviceId,
    records: &[ReplayRecord],
    realtime: bool,
    wait_clients: usize,
    feed: &Feed,
) {
    if wait_clients > 0 {
        log::info!("waiting for {wait_clients} client(s) before replay");
    }
    while feed.receiver_count() < wait_clients {
        thread::sleep(Duration::from_millis(10));
    }
    let start = Instant::now();
    let t0 = records.first().map_or(0, |r| r.t_ms);
    let mut free_running = false;
    for record in records {
        if realtime {
            let due = start + Duration::from_millis(record.t_ms - t0);
            thread::sleep(due.saturating_duration_since(Instant::now()));
        } else if feed.len() <= BACKPRESSURE_HIGH_WATER {
            free_running = false;
        } else if !free_running {
            let deadline = Instant::now() + BACKPRESSURE_WAIT;
            while feed.len() > BACKPRESSURE_HIGH_WATER && Instant::now() < deadline {
                thread::sleep(Duration::from_millis(1));
            }
            free_running = feed.len() > BACKPRESSURE_HIGH_WATER;
        }
        inject(handle, device, record.clone());
    }
    log::info!("replay finished: {} reports", records.len());
}

fn drive_stdin(handle: &RegistryHandle<SimTransport>, device: DeviceId) {
    log::info!("stdin-sim: type spaces and press Enter to jump");
    let start = Instant::now();
    let mut next_free = 0u64;
    for byte in std::io::stdin().lock().bytes() {
        let Ok(byte) = byte else { break };
        if byte != b' ' {
            continue;
        }
        let now = start.elapsed().as_millis() as u64;
        let burst = sim::keypress_burst(now.max(next_free));
        next_free = burst.last().map_or(next_free, |r| r.t_ms + sim::REPORT_INTERVAL_MS);
        for record in burst {
            let due = start + Duration::from_millis(record.t_ms);
            thread::sleep(due.saturating_duration_since(Instant::now()));
            inject(handle, device, record);
        }
    }
}

async fn upgrade(ws: WebSocketUpgrade, State(feed): State<Feed>) -> Response {
    ws.on_upgrade(move |socket| client(socket, feed.subscribe()))
}

async fn send(socket: &mut WebSocket, message: Message) -> bool {
    matches!(tokio::time::timeout(SEND_TIMEOUT, socket.send(message)).await, Ok(Ok(())))
}

async fn client(mut socket: WebSocket, mut rx: broadcast::Receiver<Arc<str>>) {
    if !send(&mut socket, Message::Text(ServerMessage::hello().to_json().into())).await {
        return;
    }
    loop {
        tokio::select! {
            next = rx.recv() => match next {
                Ok(text) => {
                    if !send(&mut socket, Message::Text(text.as_ref().into())).await {
                        log::warn!("client stopped reading; disconnecting");
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(missed)) => {
                    log::warn!("client fell {missed} messages behind; disconnecting");
                    let frame = CloseFrame {
                        code: axum::extract::ws::close_code::POLICY,
                        reason: "lagged".into(),
                    };
                    send(&mut socket, Message::Close(Some(frame))).await;
                    break;
                }
                Err(broadcast::error::RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    if ClientMessage::parse(text.as_str()) == Some(ClientMessage::Ping)
                        && !send(&mut socket, Message::Text(ServerMessage::Pong.to_json().into())).await
                    {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | Some(Err(_)) | None => break,
                Some(Ok(_)) => {}
            },
        }
    }
}

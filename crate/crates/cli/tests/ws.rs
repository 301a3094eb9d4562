mod support;

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use hidwire::joycon::JoyConSide;
use hidwire::jump::JumpConfig;
use hidwire::transport::load_replay;
use hidwire_cli::commands::replay_messages;
use hidwire_cli::serve::{self, ServeOptions, Source};
use serde_json::Value;
use sha2::{Digest, Sha256};
use support::fixture;
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

const TIMEOUT: Duration = Duration::from_secs(10);

async fn start(options: ServeOptions) -> String {
    let listener = serve::bind(0).await.unwrap();
    let url = format!("ws://{}/", listener.local_addr().unwrap());
    tokio::spawn(serve::run(listener, options, std::future::pending()));
    url
}

async fn connect(url: &str) -> Client {
    connect_async(url).await.unwrap().0
}

async fn next_text(client: &mut Client) -> String {
    loop {
        let msg = tokio::time::timeout(TIMEOUT, client.next())
            .await
            .expect("timed out waiting for a message")
            .expect("stream ended")
            .unwrap();
        if let Message::Text(text) = msg {
            return text.to_string();
        }
    }
}

async fn take(client: &mut Client, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(next_text(client).await);
    }
    out
}

fn replay_options(log: &str, wait_clients: usize) -> (ServeOptions, Vec<String>) {
    let records = load_replay(&fixture(log)).unwrap();
    let expected = replay_messages(&records, JoyConSide::Right, JumpConfig::default())
        .unwrap()
        .iter()
        .map(|m| m.to_json())
        .collect();
    let options = ServeOptions {
        source: Source::Replay(records),
        wait_clients,
        ..ServeOptions::default()
    };
    (options, expected)
}

fn hello() -> String {
    r#"{"type":"hello","version":1}"#.to_string()
}

#[tokio::test]
async fn hello_comes_first() {
    let url = start(ServeOptions {
        wait_clients: 0,
        ..ServeOptions::default()
    })
    .await;
    let mut client = connect(&url).await;
    assert_eq!(next_text(&mut client).await, hello());
}

#[tokio::test]
async fn ping_pong_and_unknown_messages() {
    let url = start(ServeOptions {
        wait_clients: 0,
        ..ServeOptions::default()
    })
    .await;
    let mut client = connect(&url).await;
    next_text(&mut client).await;
    client.send(Message::text(r#"{"type":"dance"}"#)).await.unwrap();
    client.send(Message::text("garbage")).await.unwrap();
    client.send(Message::text(r#"{"type":"ping"}"#)).await.unwrap();
    assert_eq!(next_text(&mut client).await, r#"{"type":"pong"}"#);
}

#[tokio::test]
async fn buttons_arrive_in_log_order() {
    let (options, expected) = replay_options("joycon_session.jsonl", 1);
    let url = start(options).await;
    let mut client = connect(&url).await;
    let got = take(&mut client, expected.len() + 1).await;
    assert_eq!(got[0], hello());
    assert_eq!(got[1..], expected[..]);
    let buttons: Vec<String> = got
        .iter()
        .map(|t| serde_json::from_str::<Value>(t).unwrap())
        .filter(|v| v["type"] == "button")
        .map(|v| v["button"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(buttons, ["A", "X", "B", "Y"]);
}

#[tokio::test]
async fn two_clients_see_identical_streams() {
    let (options, expected) = replay_options("ten_jumps.jsonl", 2);
    let url = start(options).await;
    let mut a = connect(&url).await;
    let mut b = connect(&url).await;
    let n = expected.len() + 1;
    let (got_a, got_b) = tokio::join!(take(&mut a, n), take(&mut b, n));
    let digest = |msgs: &[String]| Sha256::digest(msgs.join("\n").as_bytes());
    assert_eq!(digest(&got_a), digest(&got_b));
    let jumps = got_a.iter().filter(|t| t.contains(r#""type":"jump""#)).count();
    assert_eq!(jumps, 10);
}

#[tokio::test]
async fn recorded_session_matches_schema() {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("../schema/ws-messages.schema.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    let (options, expected) = replay_options("joycon_session.jsonl", 1);
    let url = start(options).await;
    let mut client = connect(&url).await;
    let mut session = take(&mut client, expected.len() + 1).await;
    client.send(Message::text(r#"{"type":"ping"}"#)).await.unwrap();
    session.push(next_text(&mut client).await);

    let kinds: std::collections::BTreeSet<String> = session
        .iter()
        .map(|t| {
            let v: Value = serde_json::from_str(t).unwrap();
            assert!(validator.is_valid(&v), "{t} does not match the schema");
            v["type"].as_str().unwrap().to_string()
        })
        .collect();
    assert_eq!(kinds.len(), 5, "session covers every message type: {kinds:?}");

    for bad in [
        r#"{"type":"button","button":"Z","t_ms":0}"#,
        r#"{"type":"imu","t_ms":0,"accel":[0,0],"gyro":[0,0,0]}"#,
        r#"{"type":"hello","version":2}"#,
        r#"{"type":"jump","t_ms":0}"#,
    ] {
        assert!(!validator.is_valid(&serde_json::from_str(bad).unwrap()), "{bad} should be rejected");
    }
}

#[tokio::test]
async fn occupied_port_is_reported() {
    let listener = serve::bind(0).await.unwrap();
    let port = listener.local_addr().unwrap().port();
    assert!(matches!(serve::bind(port).await, Err(hidwire_cli::CliError::PortInUse(p)) if p == port));
}

#[tokio::test]
async fn stdin_sim_space_is_button_and_jump() {
    use std::io::Write;
    use std::process::{Command, Stdio};

    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_hidwire"))
        .args(["serve", "--stdin-sim", "--port", &port.to_string()])
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let url = format!("ws://127.0.0.1:{port}/");
    let mut client = None;
    for _ in 0..200 {
        if let Ok((c, _)) = connect_async(&url).await {
            client = Some(c);
            break;
        }
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
    let mut client = client.expect("server did not come up");
    assert_eq!(next_text(&mut client).await, hello());
    child.stdin.as_mut().unwrap().write_all(b" \n").unwrap();

    let mut seen = Vec::new();
    while !seen.iter().any(|t: &String| t.contains("\"jump\"")) {
        let text = next_text(&mut client).await;
        if !text.contains("\"imu\"") {
            seen.push(text);
        }
    }
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(seen.len(), 2, "{seen:?}");
    assert!(seen[0].starts_with(r#"{"type":"button","button":"A""#));
}

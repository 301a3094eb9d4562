use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};

use hidwire::codec::decode_report;
use hidwire::descriptor::{parse_descriptor, parse_hex_bytes, ReportDescriptor, ReportKind};
use hidwire::device::Registry;
use hidwire::joycon::{self, JoyConSide};
use hidwire::jump::JumpConfig;
use hidwire::stream::{attach_joycon, ServerMessage};
use hidwire::transport::{run_replay, ReplayRecord};

use crate::CliError;

/// Reads a descriptor file: hex text by default, raw bytes with `raw`.
pub fn read_descriptor(path: &Path, raw: bool) -> Result<ReportDescriptor, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let bytes = if raw {
        bytes
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| CliError::Input(format!("{}: not UTF-8 hex text (try --raw)", path.display())))?;
        parse_hex_bytes(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
    };
    parse_descriptor(&bytes).map_err(|e| CliError::Input(e.to_string()))
}

pub fn dump_descriptor(path: &Path, raw: bool) -> Result<String, CliError> {
    let desc = read_descriptor(path, raw)?;
    Ok(serde_json::to_string_pretty(&desc).expect("descriptor serializes"))
}

pub fn decode(path: &Path, raw: bool, kind: ReportKind, report_id: u8, data_hex: &str) -> Result<String, CliError> {
    let desc = read_descriptor(path, raw)?;
    let data = hex::decode(data_hex.trim()).map_err(|e| CliError::Input(format!("--data: {e}")))?;
    let fields = decode_report(&desc, kind, report_id, &data).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(serde_json::to_string_pretty(&fields).expect("fields serialize"))
}

/// Runs `records` through a simulated Joy-Con and collects every decoded
/// message, in virtual-time order.
pub fn replay_messages(
    records: &[ReplayRecord],
    side: JoyConSide,
    config: JumpConfig,
) -> Result<Vec<ServerMessage>, CliError> {
    let mut registry = Registry::default();
    let id = registry.connect(joycon::device_info(side));
    let out = Arc::new(Mutex::new(Vec::new()));
    let sink = out.clone();
    attach_joycon(&mut registry, id, config, move |m| sink.lock().unwrap().push(m))
        .map_err(|e| CliError::Failure(e.to_string()))?;
    run_replay(&mut registry, id, records, None).map_err(|e| CliError::Failure(e.to_string()))?;
    drop(registry);
    let messages = std::mem::take(&mut *out.lock().unwrap());
    Ok(messages)
}

/// Human-readable line for a message; IMU samples are not printed.
pub fn format_text(message: &ServerMessage) -> Option<String> {
    match message {
        ServerMessage::Button { button, t_ms } => Some(format!("{t_ms:>8} ms  Pressed button {}", button.name())),
        ServerMessage::Jump { t_ms, peak_g } => Some(format!("{t_ms:>8} ms  Jump (peak {peak_g:.3} g)")),
        _ => None,
    }
}

pub fn write_messages<W: Write>(mut out: W, messages: &[ServerMessage], json: bool) -> std::io::Result<()> {
    for message in messages {
        if json {
            writeln!(out, "{}", message.to_json())?;
        } else if let Some(line) = format_text(message) {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use hidwire::joycon::SimpleButton;
    use hidwire::sim;

    #[test]
    fn button_log() {
        let records = [ReplayRecord {
            t_ms: 0,
            report_id: 0x3f,
            data: vec![0x01],
        }];
        let msgs = replay_messages(&records, JoyConSide::Right, JumpConfig::default()).unwrap();
        assert_eq!(
            msgs,
            vec![ServerMessage::Button {
                button: SimpleButton::A,
                t_ms: 0
            }]
        );
    }

    #[test]
    fn left_joycon_has_no_simple_buttons() {
        let msgs = replay_messages(&sim::demo_session(), JoyConSide::Left, JumpConfig::default()).unwrap();
        assert!(!msgs.iter().any(|m| matches!(m, ServerMessage::Button { .. })));
        assert_eq!(msgs.iter().filter(|m| matches!(m, ServerMessage::Jump { .. })).count(), 2);
    }

    #[test]
    fn text_format() {
        let mut out = Vec::new();
        let msgs = [
            ServerMessage::Button {
                button: SimpleButton::Y,
                t_ms: 15,
            },
            ServerMessage::Imu {
                t_ms: 20,
                accel: [0.0; 3],
                gyro: [0.0; 3],
            },
            ServerMessage::Jump { t_ms: 40, peak_g: 2.5 },
        ];
        write_messages(&mut out, &msgs, false).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "      15 ms  Pressed button Y\n      40 ms  Jump (peak 2.500 g)\n"
        );
    }
}

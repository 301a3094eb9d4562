//! Decoded Joy-Con event stream and its JSON wire format.
//!
//! Server messages are JSON objects tagged by `type`:
//!
//! ```text
//! {"type":"hello","version":1}
//! {"type":"button","button":"A","t_ms":120}
//! {"type":"imu","t_ms":135,"accel":[0.0,0.0,1.0],"gyro":[0.0,0.0,0.0]}
//! {"type":"jump","t_ms":140,"peak_g":2.8}
//! {"type":"pong"}
//! ```
//!
//! The only client message is `{"type":"ping"}`; anything else is ignored.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceError, DeviceId, InputReportEvent, Registry};
use crate::joycon::{
    self, decode_simple_button, decode_standard_report, JoyConSide, SimpleButton, SubcommandSession,
    REPORT_SIMPLE, REPORT_STANDARD,
};
use crate::jump::{magnitude, JumpConfig, JumpDetector, JumpError};
use crate::transport::Transport;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ServerMessage {
    Hello { version: u32 },
    Button { button: SimpleButton, t_ms: u64 },
    Imu { t_ms: u64, accel: [f64; 3], gyro: [f64; 3] },
    Jump { t_ms: u64, peak_g: f64 },
    Pong,
}

impl ServerMessage {
    pub fn hello() -> Self {
        ServerMessage::Hello {
            version: PROTOCOL_VERSION,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Ping,
}

impl ClientMessage {
    /// `None` for malformed or unknown messages.
    pub fn parse(text: &str) -> Option<Self> {
        serde_json::from_str(text).ok()
    }
}

/// Turns a Joy-Con's input reports into button, IMU and jump messages.
pub struct JoyConPipeline {
    product_id: u16,
    detector: JumpDetector,
    last_frame_ms: Option<u64>,
}

impl JoyConPipeline {
    pub fn new(product_id: u16, config: JumpConfig) -> Result<Self, JumpError> {
        Ok(JoyConPipeline {
            product_id,
            detector: JumpDetector::new(config)?,
            last_frame_ms: None,
        })
    }

    pub fn process(&mut self, report_id: u8, data: &[u8], t_ms: u64) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        match report_id {
            REPORT_SIMPLE => match decode_simple_button(self.product_id, report_id, data) {
                Ok(Some(button)) => out.push(ServerMessage::Button { button, t_ms }),
                Ok(None) => {}
                Err(e) => log::warn!("simple report at {t_ms} ms: {e}"),
            },
            REPORT_STANDARD => match decode_standard_report(report_id, data, t_ms) {
                Ok(report) => {
                    for frame in report.frames {
                        // Reports closer than three frame periods overlap;
                        // keep the detector's time base monotone.
                        if self.last_frame_ms.is_some_and(|last| frame.t_ms < last) {
                            log::warn!("dropping IMU frame at {} ms: overlaps previous report", frame.t_ms);
                            continue;
                        }
                        self.last_frame_ms = Some(frame.t_ms);
                        out.push(ServerMessage::Imu {
                            t_ms: frame.t_ms,
                            accel: frame.accel,
                            gyro: frame.gyro,
                        });
                        match self.detector.process_sample(frame.t_ms, magnitude(&frame)) {
                            Ok(Some(jump)) => out.push(ServerMessage::Jump {
                                t_ms: jump.t_ms,
                                peak_g: jump.peak_g,
                            }),
                            Ok(None) => {}
                            Err(e) => log::warn!("{e}"),
                        }
                    }
                }
                Err(e) => log::warn!("standard report at {t_ms} ms: {e}"),
            },
            _ => {}
        }
        out
    }

    pub fn process_event(&mut self, event: &InputReportEvent) -> Vec<ServerMessage> {
        self.process(event.report_id, &event.data, event.timestamp_ms)
    }
}

/// Grants, opens and configures a connected Joy-Con, then routes its decoded
/// messages to `sink`.
///
/// The Joy-Con is requested with the two Joy-Con filters, so `device` must be
/// one. After opening, the IMU is enabled and standard mode selected; both
/// subcommands go out through the transport.
pub fn attach_joycon<T, F>(
    registry: &mut Registry<T>,
    device: DeviceId,
    config: JumpConfig,
    mut sink: F,
) -> Result<(), AttachError>
where
    T: Transport,
    F: FnMut(ServerMessage) + Send + 'static,
{
    let side = JoyConSide::from_ids(device.vendor_id, device.product_id).ok_or(AttachError::NotAJoyCon(device))?;
    registry.request_device(&joycon::joycon_filters(), |candidates| {
        candidates.iter().position(|d| d.device_id == device)
    })?;
    registry.open(&device)?;
    let mut subcommands = SubcommandSession::new();
    let imu = subcommands.enable_imu();
    registry.send_report(&device, imu.report_id, &imu.data)?;
    let mode = subcommands
        .set_mode(REPORT_STANDARD)
        .expect("standard mode is a valid mode");
    registry.send_report(&device, mode.report_id, &mode.data)?;
    let mut pipeline = JoyConPipeline::new(side.product_id(), config)?;
    registry.subscribe_input_reports(&device, move |event| {
        for message in pipeline.process_event(event) {
            sink(message);
        }
    })?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum AttachError {
    #[error("{0} is not a Joy-Con")]
    NotAJoyCon(DeviceId),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Jump(#[from] JumpError),
}

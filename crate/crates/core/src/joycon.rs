//! Nintendo Joy-Con driver.
//!
//! Joy-Cons are matched by USB ids: vendor `0x057e`, product `0x2006`
//! (left) or `0x2007` (right).
//!
//! # Simple HID mode (input report `0x3f`)
//!
//! Only the right Joy-Con's simple report is decoded here. Its first body
//! byte holds one button code:
//!
//! | value | button |
//! |-------|--------|
//! | 0x01  | A      |
//! | 0x02  | X      |
//! | 0x04  | B      |
//! | 0x08  | Y      |
//!
//! Zero means no button. Anything else (chords, SL/SR, triggers) is ignored.
//!
//! # Standard mode (input report `0x30`)
//!
//! Offsets are into the report body, after the report id byte:
//!
//! | bytes  | content                                           |
//! |--------|---------------------------------------------------|
//! | 0      | timer                                             |
//! | 1      | battery / connection                              |
//! | 2..=4  | buttons (right, shared, left), 24-bit little-endian |
//! | 5..=7  | left stick, two 12-bit values                     |
//! | 8..=10 | right stick, two 12-bit values                    |
//! | 11     | vibrator report                                   |
//! | 12..=47| three IMU frames of 12 bytes                      |
//!
//! Each IMU frame is six `i16` little-endian values: accel X, Y, Z then gyro
//! X, Y, Z. Accelerometer counts are scaled by 0.000244 g/LSB (±8 g range),
//! gyroscope counts by 0.06103 °/s per LSB (±2000 °/s). The three frames are
//! sampled 5 ms apart, oldest first.
//!
//! # Subcommand output report (`0x01`)
//!
//! | bytes | content                               |
//! |-------|---------------------------------------|
//! | 0     | packet counter, 4 bits, rolling       |
//! | 1..=8 | rumble data (left, right); zeros here |
//! | 9     | subcommand id                         |
//! | 10..  | subcommand arguments                  |
//!
//! The body is zero padded to 48 bytes. Subcommand `0x40` with argument
//! `0x01` enables the IMU; subcommand `0x03` with a mode byte (`0x3f` or
//! `0x30`) switches the input report mode.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{parse_descriptor, DescriptorBuilder, ReportDescriptor, COLLECTION_APPLICATION};
use crate::device::{DeviceFilter, DeviceInfo, HidDevice};
use crate::usage::{PAGE_BUTTON, PAGE_GENERIC_DESKTOP, USAGE_HAT_SWITCH, USAGE_JOYSTICK};

pub const NINTENDO_VENDOR_ID: u16 = 0x057e;
pub const JOYCON_LEFT_PRODUCT_ID: u16 = 0x2006;
pub const JOYCON_RIGHT_PRODUCT_ID: u16 = 0x2007;

pub const REPORT_SIMPLE: u8 = 0x3f;
pub const REPORT_STANDARD: u8 = 0x30;
pub const REPORT_SUBCOMMAND_REPLY: u8 = 0x21;
pub const OUTPUT_SUBCOMMAND: u8 = 0x01;
pub const OUTPUT_RUMBLE: u8 = 0x10;

pub const SUBCOMMAND_SET_MODE: u8 = 0x03;
pub const SUBCOMMAND_ENABLE_IMU: u8 = 0x40;

pub const STANDARD_REPORT_LEN: usize = 48;
pub const SUBCOMMAND_REPORT_LEN: usize = 48;
const IMU_OFFSET: usize = 12;
const IMU_FRAME_LEN: usize = 12;

pub const ACCEL_G_PER_LSB: f64 = 0.000244;
pub const GYRO_DPS_PER_LSB: f64 = 0.06103;
pub const IMU_FRAME_SPACING_MS: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum JoyConSide {
    Left,
    Right,
}

impl JoyConSide {
    pub fn product_id(self) -> u16 {
        match self {
            JoyConSide::Left => JOYCON_LEFT_PRODUCT_ID,
            JoyConSide::Right => JOYCON_RIGHT_PRODUCT_ID,
        }
    }

    pub fn from_ids(vendor_id: u16, product_id: u16) -> Option<Self> {
        match (vendor_id, product_id) {
            (NINTENDO_VENDOR_ID, JOYCON_LEFT_PRODUCT_ID) => Some(JoyConSide::Left),
            (NINTENDO_VENDOR_ID, JOYCON_RIGHT_PRODUCT_ID) => Some(JoyConSide::Right),
            _ => None,
        }
    }
}

pub fn identify(device: &HidDevice) -> Option<JoyConSide> {
    JoyConSide::from_ids(device.vendor_id, device.product_id)
}

/// The two filters that select left and right Joy-Cons.
pub fn joycon_filters() -> [DeviceFilter; 2] {
    [
        DeviceFilter::vendor_product(NINTENDO_VENDOR_ID, JOYCON_LEFT_PRODUCT_ID),
        DeviceFilter::vendor_product(NINTENDO_VENDOR_ID, JOYCON_RIGHT_PRODUCT_ID),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimpleButton {
    A,
    X,
    B,
    Y,
}

impl SimpleButton {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0x01 => Some(SimpleButton::A),
            0x02 => Some(SimpleButton::X),
            0x04 => Some(SimpleButton::B),
            0x08 => Some(SimpleButton::Y),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            SimpleButton::A => 0x01,
            SimpleButton::X => 0x02,
            SimpleButton::B => 0x04,
            SimpleButton::Y => 0x08,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimpleButton::A => "A",
            SimpleButton::X => "X",
            SimpleButton::B => "B",
            SimpleButton::Y => "Y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ButtonEvent {
    pub button: SimpleButton,
    pub t_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JoyConError {
    #[error("EmptyReport")]
    EmptyReport,
    #[error("ReportTooShort: need {needed} bytes, got {got}")]
    ReportTooShort { needed: usize, got: usize },
    #[error("WrongMode: report {0:#04x} is not a standard-mode report")]
    WrongMode(u8),
    #[error("InvalidMode: {0:#04x}")]
    InvalidMode(u8),
}

/// Decodes a simple-mode button press from the right Joy-Con.
///
/// Returns `Ok(None)` for any other device or report id, for the idle code 0
/// and for codes outside the four-button table.
pub fn decode_simple_button(product_id: u16, report_id: u8, data: &[u8]) -> Result<Option<SimpleButton>, JoyConError> {
    let &value = data.first().ok_or(JoyConError::EmptyReport)?;
    if product_id != JOYCON_RIGHT_PRODUCT_ID || report_id != REPORT_SIMPLE {
        return Ok(None);
    }
    if value == 0 {
        return Ok(None);
    }
    let button = SimpleButton::from_code(value);
    if button.is_none() {
        log::debug!("unmapped simple-mode button code {value:#04x}");
    }
    Ok(button)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImuKind {
    Accel,
    Gyro,
}

/// Converts a raw sensor count to g (accelerometer) or °/s (gyroscope).
pub fn raw_to_physical(raw: i16, kind: ImuKind) -> f64 {
    let scale = match kind {
        ImuKind::Accel => ACCEL_G_PER_LSB,
        ImuKind::Gyro => GYRO_DPS_PER_LSB,
    };
    f64::from(raw) * scale
}

/// One accelerometer + gyroscope sample in physical units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImuFrame {
    pub accel: [f64; 3],
    pub gyro: [f64; 3],
    pub t_ms: u64,
}

impl ImuFrame {
    /// Raw counts are `[ax, ay, az, gx, gy, gz]`.
    pub fn from_raw(raw: [i16; 6], t_ms: u64) -> Self {
        let a = |i: usize| raw_to_physical(raw[i], ImuKind::Accel);
        let g = |i: usize| raw_to_physical(raw[i], ImuKind::Gyro);
        ImuFrame {
            accel: [a(0), a(1), a(2)],
            gyro: [g(3), g(4), g(5)],
            t_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardReport {
    pub timer: u8,
    /// 24-bit button bitmap from body bytes 2..=4.
    pub buttons: u32,
    pub left_stick: (u16, u16),
    pub right_stick: (u16, u16),
    pub raw_imu: [[i16; 6]; 3],
    pub frames: [ImuFrame; 3],
}

fn stick(b: &[u8]) -> (u16, u16) {
    let x = u16::from(b[0]) | (u16::from(b[1] & 0x0F) << 8);
    let y = u16::from(b[1] >> 4) | (u16::from(b[2]) << 4);
    (x, y)
}

/// Decodes a standard-mode (`0x30`) report body received at `t_ms`.
/// Frame `k` is stamped `t_ms + 5k`.
pub fn decode_standard_report(report_id: u8, data: &[u8], t_ms: u64) -> Result<StandardReport, JoyConError> {
    if report_id != REPORT_STANDARD {
        return Err(JoyConError::WrongMode(report_id));
    }
    if data.len() < STANDARD_REPORT_LEN {
        return Err(JoyConError::ReportTooShort {
            needed: STANDARD_REPORT_LEN,
            got: data.len(),
        });
    }
    let mut raw_imu = [[0i16; 6]; 3];
    for (k, frame) in raw_imu.iter_mut().enumerate() {
        let base = IMU_OFFSET + k * IMU_FRAME_LEN;
        for (j, value) in frame.iter_mut().enumerate() {
            *value = i16::from_le_bytes([data[base + 2 * j], data[base + 2 * j + 1]]);
        }
    }
    let frames = [0, 1, 2].map(|k| ImuFrame::from_raw(raw_imu[k], t_ms + IMU_FRAME_SPACING_MS * k as u64));
    Ok(StandardReport {
        timer: data[0],
        buttons: u32::from(data[2]) | (u32::from(data[3]) << 8) | (u32::from(data[4]) << 16),
        left_stick: stick(&data[5..8]),
        right_stick: stick(&data[8..11]),
        raw_imu,
        frames,
    })
}

/// Builds a standard-mode body from a button bitmap and raw IMU counts.
/// Sticks are centred; everything else is zero.
pub fn encode_standard_report(timer: u8, buttons: u32, raw_imu: &[[i16; 6]; 3]) -> Vec<u8> {
    let mut body = vec![0u8; STANDARD_REPORT_LEN];
    body[0] = timer;
    body[2..5].copy_from_slice(&buttons.to_le_bytes()[..3]);
    // 0x800 on both axes.
    body[5..8].copy_from_slice(&[0x00, 0x08, 0x80]);
    body[8..11].copy_from_slice(&[0x00, 0x08, 0x80]);
    for (k, frame) in raw_imu.iter().enumerate() {
        let base = IMU_OFFSET + k * IMU_FRAME_LEN;
        for (j, value) in frame.iter().enumerate() {
            body[base + 2 * j..base + 2 * j + 2].copy_from_slice(&value.to_le_bytes());
        }
    }
    body
}

/// An output report ready for [`Registry::send_report`](crate::device::Registry::send_report).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputReport {
    pub report_id: u8,
    pub data: Vec<u8>,
}

fn subcommand_report(counter: u8, subcommand: u8, args: &[u8]) -> OutputReport {
    let mut data = vec![0u8; SUBCOMMAND_REPORT_LEN];
    data[0] = counter & 0x0F;
    data[9] = subcommand;
    data[10..10 + args.len()].copy_from_slice(args);
    OutputReport {
        report_id: OUTPUT_SUBCOMMAND,
        data,
    }
}

pub fn build_enable_imu_report(counter: u8) -> OutputReport {
    subcommand_report(counter, SUBCOMMAND_ENABLE_IMU, &[0x01])
}

pub fn build_set_mode_report(counter: u8, mode: u8) -> Result<OutputReport, JoyConError> {
    match mode {
        REPORT_SIMPLE | REPORT_STANDARD => Ok(subcommand_report(counter, SUBCOMMAND_SET_MODE, &[mode])),
        other => Err(JoyConError::InvalidMode(other)),
    }
}

/// Owns the rolling packet counter for one Joy-Con.
#[derive(Debug, Clone, Default)]
pub struct SubcommandSession {
    counter: u8,
}

impl SubcommandSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counter(&self) -> u8 {
        self.counter
    }

    fn next_counter(&mut self) -> u8 {
        let c = self.counter;
        self.counter = (self.counter + 1) & 0x0F;
        c
    }

    pub fn enable_imu(&mut self) -> OutputReport {
        build_enable_imu_report(self.next_counter())
    }

    pub fn set_mode(&mut self, mode: u8) -> Result<OutputReport, JoyConError> {
        // Validate before consuming a counter value.
        build_set_mode_report(0, mode)?;
        build_set_mode_report(self.next_counter(), mode)
    }
}

/// Report descriptor presented by the simulated Joy-Cons.
///
/// One Joystick application collection declaring input reports `0x3f`
/// (11 bytes), `0x30` and `0x21` (48 bytes each) and output reports `0x01`
/// (48 bytes) and `0x10` (9 bytes).
pub fn joycon_descriptor_bytes() -> Vec<u8> {
    DescriptorBuilder::new()
        .usage_page(PAGE_GENERIC_DESKTOP)
        .usage(USAGE_JOYSTICK)
        .collection(COLLECTION_APPLICATION)
        // Simple HID report: 16 buttons, hat, 4 axes.
        .report_id(REPORT_SIMPLE)
        .usage_page(PAGE_BUTTON)
        .usage_min(1)
        .usage_max(16)
        .logical_min(0)
        .logical_max(1)
        .report_size(1)
        .report_count(16)
        .input(0x02)
        .usage_page(PAGE_GENERIC_DESKTOP)
        .usage(USAGE_HAT_SWITCH)
        .logical_max(7)
        .report_size(4)
        .report_count(1)
        .input(0x42)
        .input(0x01)
        .usage(0x30)
        .usage(0x31)
        .usage(0x33)
        .usage(0x34)
        .logical_max(0xFFFF)
        .report_size(16)
        .report_count(4)
        .input(0x02)
        // Vendor reports.
        .usage_page(0xFF00)
        .logical_max(0xFF)
        .report_size(8)
        .report_id(REPORT_STANDARD)
        .usage(0x30)
        .report_count(STANDARD_REPORT_LEN as u32)
        .input(0x02)
        .report_id(REPORT_SUBCOMMAND_REPLY)
        .usage(0x21)
        .input(0x02)
        .report_id(OUTPUT_SUBCOMMAND)
        .usage(0x01)
        .report_count(SUBCOMMAND_REPORT_LEN as u32)
        .output(0x02)
        .report_id(OUTPUT_RUMBLE)
        .usage(0x10)
        .report_count(9)
        .output(0x02)
        .end_collection()
        .build()
}

pub fn joycon_descriptor() -> ReportDescriptor {
    parse_descriptor(&joycon_descriptor_bytes()).expect("built-in Joy-Con descriptor parses")
}

pub fn device_info(side: JoyConSide) -> DeviceInfo {
    DeviceInfo {
        vendor_id: NINTENDO_VENDOR_ID,
        product_id: side.product_id(),
        product_name: match side {
            JoyConSide::Left => "Joy-Con (L)".to_owned(),
            JoyConSide::Right => "Joy-Con (R)".to_owned(),
        },
        descriptor: joycon_descriptor(),
    }
}

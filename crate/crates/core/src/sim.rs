//! Synthetic Joy-Con sessions for fixtures and hardware-free play.
//!
//! A [`SessionBuilder`] lays down replay records on a 15 ms report cadence:
//! standard-mode reports carrying three IMU frames each, simple-mode button
//! presses, and jump spikes shaped like a hop with the controller in a
//! pocket.

use crate::joycon::{encode_standard_report, SimpleButton, ACCEL_G_PER_LSB, REPORT_SIMPLE, REPORT_STANDARD};
use crate::transport::ReplayRecord;

pub const REPORT_INTERVAL_MS: u64 = 15;

/// Magnitude profile of one jump, relative to its peak. Take-off and landing
/// sit inside the hysteresis band; the report after landing returns to rest.
const JUMP_PROFILE: [f64; 9] = [1.0, 1.4, 0.78, 1.0, 0.85, 1.5, 0.95, 1.0, 1.0];
/// Indices of `JUMP_PROFILE` that scale with the peak rather than being
/// absolute magnitudes in g.
const PEAK_RELATIVE: [usize; 3] = [2, 3, 4];

pub fn g_to_raw(g: f64) -> i16 {
    (g / ACCEL_G_PER_LSB).round().clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16
}

#[derive(Debug, Clone, Default)]
pub struct SessionBuilder {
    records: Vec<ReplayRecord>,
    t_ms: u64,
    timer: u8,
}

impl SessionBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts the session at `t_ms` instead of 0.
    pub fn starting_at(t_ms: u64) -> Self {
        SessionBuilder {
            t_ms,
            ..Self::default()
        }
    }

    pub fn now_ms(&self) -> u64 {
        self.t_ms
    }

    fn standard(&mut self, magnitudes: [f64; 3]) {
        // Gravity along z with a little deterministic wobble on x.
        let raw = [0, 1, 2].map(|k| {
            let wobble = if (usize::from(self.timer) + k) % 2 == 0 { 12 } else { -12 };
            [wobble, 0, g_to_raw(magnitudes[k]), 0, 0, 0]
        });
        self.records.push(ReplayRecord {
            t_ms: self.t_ms,
            report_id: REPORT_STANDARD,
            data: encode_standard_report(self.timer, 0, &raw),
        });
        self.timer = self.timer.wrapping_add(1);
        self.t_ms += REPORT_INTERVAL_MS;
    }

    /// At-rest standard reports covering `duration_ms`.
    pub fn rest(mut self, duration_ms: u64) -> Self {
        let end = self.t_ms + duration_ms;
        while self.t_ms < end {
            self.standard([1.0; 3]);
        }
        self
    }

    /// Three standard reports tracing one jump that peaks at `peak_g`.
    pub fn jump(mut self, peak_g: f64) -> Self {
        let mut m = JUMP_PROFILE;
        for i in PEAK_RELATIVE {
            m[i] *= peak_g;
        }
        for chunk in m.chunks_exact(3) {
            self.standard([chunk[0], chunk[1], chunk[2]]);
        }
        self
    }

    /// A simple-mode press followed by the idle report one interval later.
    pub fn press(mut self, button: SimpleButton) -> Self {
        for code in [button.code(), 0] {
            self.records.push(ReplayRecord {
                t_ms: self.t_ms,
                report_id: REPORT_SIMPLE,
                data: simple_body(code),
            });
            self.t_ms += REPORT_INTERVAL_MS;
        }
        self
    }

    pub fn build(self) -> Vec<ReplayRecord> {
        self.records
    }
}

/// Simple-mode bodies are 11 bytes; the button code sits in the first.
fn simple_body(code: u8) -> Vec<u8> {
    let mut body = vec![0u8; 11];
    body[0] = code;
    body
}

/// Ten well-separated jumps between stretches of rest.
pub fn ten_jumps() -> Vec<ReplayRecord> {
    let mut session = SessionBuilder::new().rest(300);
    for i in 0..10 {
        session = session.jump(2.4 + 0.1 * f64::from(i)).rest(600);
    }
    session.build()
}

/// All four buttons, then two jumps.
pub fn demo_session() -> Vec<ReplayRecord> {
    SessionBuilder::new()
        .press(SimpleButton::A)
        .press(SimpleButton::X)
        .press(SimpleButton::B)
        .press(SimpleButton::Y)
        .rest(150)
        .jump(2.6)
        .rest(450)
        .jump(3.1)
        .rest(150)
        .build()
}

/// What `--stdin-sim` injects for one key press: an A press and a jump.
pub fn keypress_burst(t_ms: u64) -> Vec<ReplayRecord> {
    SessionBuilder::starting_at(t_ms)
        .press(SimpleButton::A)
        .jump(2.5)
        .rest(REPORT_INTERVAL_MS)
        .build()
}

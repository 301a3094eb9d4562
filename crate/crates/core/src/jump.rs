//! Jump detection from accelerometer magnitude.
//!
//! The detector is a two-state hysteresis machine over `|accel|` in g, so it
//! does not care how the controller is oriented:
//!
//! * **Armed.** A sample above `t_high_g` starts an excursion. If at least
//!   `debounce_ms` have passed since the last jump (or there was none), a
//!   [`JumpEvent`] is emitted. Either way the machine moves to *Triggered*;
//!   an excursion that starts inside the debounce window is swallowed whole.
//! * **Triggered.** A sample below `t_low_g` re-arms the machine.
//!
//! Samples exactly at a threshold do not cross it. The machine starts armed.
//!
//! This detector and its default thresholds are our own construction, tuned
//! for a controller carried in a trouser pocket.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::joycon::ImuFrame;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JumpConfig {
    pub t_high_g: f64,
    pub t_low_g: f64,
    pub debounce_ms: u64,
}

impl Default for JumpConfig {
    fn default() -> Self {
        JumpConfig {
            t_high_g: 1.8,
            t_low_g: 1.2,
            debounce_ms: 250,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JumpError {
    #[error("NonMonotoneTime: sample at {t_ms} ms after one at {last_ms} ms")]
    NonMonotoneTime { t_ms: u64, last_ms: u64 },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(&'static str),
}

impl JumpConfig {
    pub fn validate(&self) -> Result<(), JumpError> {
        if !(self.t_low_g.is_finite() && self.t_high_g.is_finite()) {
            return Err(JumpError::InvalidConfig("thresholds must be finite"));
        }
        if self.t_low_g >= self.t_high_g {
            return Err(JumpError::InvalidConfig("t_low_g must be below t_high_g"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpEvent {
    pub t_ms: u64,
    /// Magnitude of the sample that triggered the event.
    pub peak_g: f64,
}

pub fn magnitude(frame: &ImuFrame) -> f64 {
    let [x, y, z] = frame.accel;
    (x * x + y * y + z * z).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Armed,
    Triggered,
}

/// Per-stream detector state.
#[derive(Debug, Clone)]
pub struct JumpDetector {
    config: JumpConfig,
    phase: Phase,
    last_t: Option<u64>,
    last_jump: Option<u64>,
    excursion_peak: f64,
}

impl JumpDetector {
    pub fn new(config: JumpConfig) -> Result<Self, JumpError> {
        config.validate()?;
        Ok(JumpDetector {
            config,
            phase: Phase::Armed,
            last_t: None,
            last_jump: None,
            excursion_peak: 0.0,
        })
    }

    pub fn config(&self) -> &JumpConfig {
        &self.config
    }

    pub fn is_armed(&self) -> bool {
        self.phase == Phase::Armed
    }

    /// Largest magnitude seen in the current (or most recent) excursion.
    pub fn excursion_peak(&self) -> f64 {
        self.excursion_peak
    }

    pub fn process_sample(&mut self, t_ms: u64, magnitude_g: f64) -> Result<Option<JumpEvent>, JumpError> {
        if let Some(last_ms) = self.last_t {
            if t_ms < last_ms {
                return Err(JumpError::NonMonotoneTime { t_ms, last_ms });
            }
        }
        self.last_t = Some(t_ms);
        match self.phase {
            Phase::Armed => {
                if magnitude_g > self.config.t_high_g {
                    self.phase = Phase::Triggered;
                    self.excursion_peak = magnitude_g;
                    let clear = self
                        .last_jump
                        .is_none_or(|last| t_ms - last >= self.config.debounce_ms);
                    if clear {
                        self.last_jump = Some(t_ms);
                        return Ok(Some(JumpEvent {
                            t_ms,
                            peak_g: magnitude_g,
                        }));
                    }
                }
            }
            Phase::Triggered => {
                if magnitude_g < self.config.t_low_g {
                    self.phase = Phase::Armed;
                } else {
                    self.excursion_peak = self.excursion_peak.max(magnitude_g);
                }
            }
        }
        Ok(None)
    }
}

/// Runs a fresh detector over a whole trace.
pub fn detect_jumps(trace: &[(u64, ImuFrame)], config: JumpConfig) -> Result<Vec<JumpEvent>, JumpError> {
    let mut detector = JumpDetector::new(config)?;
    let mut events = Vec::new();
    for (t_ms, frame) in trace {
        if let Some(event) = detector.process_sample(*t_ms, magnitude(frame))? {
            events.push(event);
        }
    }
    Ok(events)
}

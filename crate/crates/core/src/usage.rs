//! Usage pages and usage identifiers.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const PAGE_GENERIC_DESKTOP: u16 = 0x01;
pub const PAGE_KEYBOARD: u16 = 0x07;
pub const PAGE_LED: u16 = 0x08;
pub const PAGE_BUTTON: u16 = 0x09;
pub const PAGE_CONSUMER: u16 = 0x0C;
pub const PAGE_FIDO: u16 = 0xF1D0;
pub const PAGE_VENDOR_FIRST: u16 = 0xFF00;

pub const USAGE_POINTER: u16 = 0x01;
pub const USAGE_MOUSE: u16 = 0x02;
pub const USAGE_JOYSTICK: u16 = 0x04;
pub const USAGE_GAME_PAD: u16 = 0x05;
pub const USAGE_KEYBOARD: u16 = 0x06;
pub const USAGE_KEYPAD: u16 = 0x07;
pub const USAGE_X: u16 = 0x30;
pub const USAGE_Y: u16 = 0x31;
pub const USAGE_HAT_SWITCH: u16 = 0x39;

/// A (usage page, usage id) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Usage {
    #[serde(rename = "usagePage")]
    pub page: u16,
    #[serde(rename = "usage")]
    pub id: u16,
}

impl Usage {
    pub const fn new(page: u16, id: u16) -> Self {
        Usage { page, id }
    }

    /// Splits a 32-bit extended usage into page (high half) and id (low half).
    pub const fn from_extended(value: u32) -> Self {
        Usage {
            page: (value >> 16) as u16,
            id: value as u16,
        }
    }

    pub const fn extended(self) -> u32 {
        ((self.page as u32) << 16) | self.id as u32
    }
}

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#06x}:{:#06x}", self.page, self.id)
    }
}

impl From<(u16, u16)> for Usage {
    fn from((page, id): (u16, u16)) -> Self {
        Usage { page, id }
    }
}

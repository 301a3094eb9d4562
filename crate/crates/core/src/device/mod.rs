//! A WebHID-shaped device registry.
//!
//! Devices are connected to a [`Registry`] by a transport. A client sees a
//! device only after it has been granted through [`Registry::request_device`]
//! (one device per call), and receives input reports only while the device is
//! open and the report does not belong to a protected top-level collection.

mod dispatch;
mod filter;
mod permission;
mod protection;
mod registry;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::descriptor::ReportDescriptor;
use crate::usage::Usage;

pub use dispatch::{Dispatcher, RegistryHandle};
pub use filter::{matches_any, matches_filter, DeviceFilter, FilterError};
pub use permission::PermissionStore;
pub use protection::{is_protected, PROTECTED_USAGES};
pub use registry::{InputListener, Registry, SubscriptionId};

/// Stable device identifier, rendered as `vendor:product:ordinal` in hex
/// (`057e:2007:0`). The ordinal tells identical devices apart in connection
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeviceId {
    pub vendor_id: u16,
    pub product_id: u16,
    pub ordinal: u32,
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04x}:{:04x}:{}", self.vendor_id, self.product_id, self.ordinal)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed device id {0:?}")]
pub struct ParseDeviceIdError(String);

impl FromStr for DeviceId {
    type Err = ParseDeviceIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDeviceIdError(s.to_owned());
        let mut parts = s.split(':');
        let (Some(v), Some(p), Some(o), None) = (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(err());
        };
        Ok(DeviceId {
            vendor_id: u16::from_str_radix(v, 16).map_err(|_| err())?,
            product_id: u16::from_str_radix(p, 16).map_err(|_| err())?,
            ordinal: o.parse().map_err(|_| err())?,
        })
    }
}

impl Serialize for DeviceId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DeviceId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// What a transport knows about a device when it shows up.
#[derive(Debug, Clone)]
pub struct DeviceInfo {
    pub vendor_id: u16,
    pub product_id: u16,
    pub product_name: String,
    pub descriptor: ReportDescriptor,
}

/// Snapshot of a connected device.
#[derive(Debug, Clone, PartialEq)]
pub struct HidDevice {
    pub device_id: DeviceId,
    pub vendor_id: u16,
    pub product_id: u16,
    pub product_name: String,
    pub descriptor: Arc<ReportDescriptor>,
    pub opened: bool,
}

impl HidDevice {
    pub fn top_level_usages(&self) -> Vec<Usage> {
        self.descriptor.top_level_usages()
    }

    /// True when every top-level collection carries a protected usage.
    pub fn is_fully_protected(&self) -> bool {
        self.descriptor
            .collections
            .iter()
            .all(|c| is_protected(c.usage_page, c.usage))
    }
}

#[derive(Debug, Clone)]
pub struct InputReportEvent {
    pub device: HidDevice,
    pub report_id: u8,
    /// Report body without the report id byte.
    pub data: Vec<u8>,
    pub timestamp_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeviceError {
    #[error("DeviceDetached: {0} is not connected")]
    DeviceDetached(DeviceId),
    #[error("NotGranted: {0} has not been granted")]
    NotGranted(DeviceId),
    #[error("AlreadyOpen: {0}")]
    AlreadyOpen(DeviceId),
    #[error("NotOpen: {0}")]
    NotOpen(DeviceId),
    #[error("UnknownReport: {device} has no output report {report_id:#04x}")]
    UnknownReport { device: DeviceId, report_id: u8 },
    #[error("ProtectedCollection: report {report_id:#04x} belongs to protected usage {usage}")]
    ProtectedCollection { report_id: u8, usage: Usage },
    #[error("ReportIdMismatch: report id {report_id:#04x} does not match the device's numbering")]
    ReportIdMismatch { report_id: u8 },
    #[error("NoDeviceChosen")]
    NoDeviceChosen,
    #[error("InvalidFilter: {0}")]
    InvalidFilter(#[from] FilterError),
    #[error("Transport: {0}")]
    Transport(String),
}

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    is_protected, matches_any, DeviceError, DeviceFilter, DeviceId, DeviceInfo, HidDevice, InputReportEvent,
    PermissionStore,
};
use crate::descriptor::ReportKind;
use crate::transport::{SimTransport, Transport};
use crate::usage::Usage;

pub type InputListener = Box<dyn FnMut(&InputReportEvent) + Send>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubscriptionId(u64);

struct Subscription {
    id: SubscriptionId,
    device: DeviceId,
    listener: InputListener,
}

/// Single-owner device registry. Every mutation goes through `&mut self`;
/// see [`Dispatcher`](super::Dispatcher) for sharing one across threads.
pub struct Registry<T: Transport = SimTransport> {
    transport: T,
    devices: BTreeMap<DeviceId, HidDevice>,
    store: PermissionStore,
    subscriptions: Vec<Subscription>,
    next_subscription: u64,
}

impl Default for Registry<SimTransport> {
    fn default() -> Self {
        Registry::new(SimTransport::new())
    }
}

impl<T: Transport> Registry<T> {
    pub fn new(transport: T) -> Self {
        Self::with_store(transport, PermissionStore::new())
    }

    pub fn with_store(transport: T, store: PermissionStore) -> Self {
        Registry {
            transport,
            devices: BTreeMap::new(),
            store,
            subscriptions: Vec::new(),
            next_subscription: 0,
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    pub fn permissions(&self) -> &PermissionStore {
        &self.store
    }

    /// Attaches a device and returns its id. Identical devices get the lowest
    /// ordinal not held by a connected twin, so a device that reconnects keeps
    /// its id (and its grant).
    pub fn connect(&mut self, info: DeviceInfo) -> DeviceId {
        let ordinal = (0..)
            .find(|&ordinal| {
                !self.devices.contains_key(&DeviceId {
                    vendor_id: info.vendor_id,
                    product_id: info.product_id,
                    ordinal,
                })
            })
            .expect("ordinal space exhausted");
        let device_id = DeviceId {
            vendor_id: info.vendor_id,
            product_id: info.product_id,
            ordinal,
        };
        self.devices.insert(
            device_id,
            HidDevice {
                device_id,
                vendor_id: info.vendor_id,
                product_id: info.product_id,
                product_name: info.product_name,
                descriptor: Arc::new(info.descriptor),
                opened: false,
            },
        );
        device_id
    }

    pub fn disconnect(&mut self, id: &DeviceId) -> bool {
        self.devices.remove(id).is_some()
    }

    pub fn device(&self, id: &DeviceId) -> Option<&HidDevice> {
        self.devices.get(id)
    }

    /// All connected devices, granted or not, in id order.
    pub fn connected(&self) -> impl Iterator<Item = &HidDevice> {
        self.devices.values()
    }

    /// Offers the chooser every connected device that matches any filter
    /// (all devices for an empty list) and is not fully protected. The chosen
    /// device is granted.
    pub fn request_device<F>(&mut self, filters: &[DeviceFilter], chooser: F) -> Result<HidDevice, DeviceError>
    where
        F: FnOnce(&[HidDevice]) -> Option<usize>,
    {
        for filter in filters {
            filter.validate()?;
        }
        let candidates: Vec<HidDevice> = self
            .devices
            .values()
            .filter(|d| matches_any(d, filters) && !d.is_fully_protected())
            .cloned()
            .collect();
        if candidates.is_empty() {
            return Err(DeviceError::NoDeviceChosen);
        }
        let chosen = chooser(&candidates)
            .and_then(|i| candidates.get(i))
            .ok_or(DeviceError::NoDeviceChosen)?
            .clone();
        self.store.grant(chosen.device_id);
        Ok(chosen)
    }

    /// Connected devices that have been granted, in id order.
    pub fn get_devices(&self) -> Vec<HidDevice> {
        self.devices
            .values()
            .filter(|d| self.store.contains(&d.device_id))
            .cloned()
            .collect()
    }

    fn granted_device(&mut self, id: &DeviceId) -> Result<&mut HidDevice, DeviceError> {
        let device = self.devices.get_mut(id).ok_or(DeviceError::DeviceDetached(*id))?;
        if !self.store.contains(id) {
            return Err(DeviceError::NotGranted(*id));
        }
        Ok(device)
    }

    pub fn open(&mut self, id: &DeviceId) -> Result<(), DeviceError> {
        let device = self.granted_device(id)?;
        if device.opened {
            return Err(DeviceError::AlreadyOpen(*id));
        }
        device.opened = true;
        Ok(())
    }

    pub fn close(&mut self, id: &DeviceId) -> Result<(), DeviceError> {
        let device = self.devices.get_mut(id).ok_or(DeviceError::DeviceDetached(*id))?;
        if !device.opened {
            return Err(DeviceError::NotOpen(*id));
        }
        device.opened = false;
        Ok(())
    }

    pub fn subscribe_input_reports(
        &mut self,
        id: &DeviceId,
        listener: impl FnMut(&InputReportEvent) + Send + 'static,
    ) -> Result<SubscriptionId, DeviceError> {
        self.granted_device(id)?;
        let sub = SubscriptionId(self.next_subscription);
        self.next_subscription += 1;
        self.subscriptions.push(Subscription {
            id: sub,
            device: *id,
            listener: Box::new(listener),
        });
        Ok(sub)
    }

    pub fn unsubscribe(&mut self, sub: SubscriptionId) -> bool {
        let before = self.subscriptions.len();
        self.subscriptions.retain(|s| s.id != sub);
        self.subscriptions.len() != before
    }

    /// The protected usage that blocks `kind` report `report_id`, if any.
    ///
    /// A declared report is blocked when any top-level collection declaring
    /// it is protected. An undeclared report is blocked unless the device has
    /// at least one unprotected top-level collection.
    fn blocking_usage(device: &HidDevice, kind: ReportKind, report_id: u8) -> Option<Usage> {
        let desc = &device.descriptor;
        let owners = desc.collections_for_report(kind, report_id);
        if owners.is_empty() {
            if device.is_fully_protected() {
                return desc.collections.first().map(|c| c.usage_pair()).or(Some(Usage::new(0, 0)));
            }
            return None;
        }
        owners
            .into_iter()
            .map(|i| desc.collections[i].usage_pair())
            .find(|u| is_protected(u.page, u.id))
    }

    fn check_numbering(device: &HidDevice, report_id: u8) -> Result<(), DeviceError> {
        if (report_id != 0) != device.descriptor.uses_report_ids() {
            return Err(DeviceError::ReportIdMismatch { report_id });
        }
        Ok(())
    }

    /// Delivers an input report from the device side. Returns how many
    /// listeners received it: zero when the device is closed or the report
    /// belongs to a protected collection.
    pub fn inject_input_report(&mut self, id: DeviceId, report_id: u8, data: &[u8]) -> Result<usize, DeviceError> {
        let device = self.devices.get(&id).ok_or(DeviceError::DeviceDetached(id))?;
        Self::check_numbering(device, report_id)?;
        if !device.opened || !self.store.contains(&id) {
            return Ok(0);
        }
        if let Some(usage) = Self::blocking_usage(device, ReportKind::Input, report_id) {
            log::debug!("dropping input report {report_id:#04x} from {id}: protected usage {usage}");
            return Ok(0);
        }
        let event = InputReportEvent {
            device: device.clone(),
            report_id,
            data: data.to_vec(),
            timestamp_ms: self.transport.now_ms(),
        };
        let mut delivered = 0;
        for sub in self.subscriptions.iter_mut().filter(|s| s.device == id) {
            (sub.listener)(&event);
            delivered += 1;
        }
        Ok(delivered)
    }

    /// Writes an output report to an open device.
    pub fn send_report(&mut self, id: &DeviceId, report_id: u8, data: &[u8]) -> Result<(), DeviceError> {
        let device = self.granted_device(id)?;
        if !device.opened {
            return Err(DeviceError::NotOpen(*id));
        }
        let device = &*device;
        if !device.descriptor.has_report(ReportKind::Output, report_id) {
            return Err(DeviceError::UnknownReport {
                device: *id,
                report_id,
            });
        }
        if let Some(usage) = Self::blocking_usage(device, ReportKind::Output, report_id) {
            return Err(DeviceError::ProtectedCollection { report_id, usage });
        }
        self.transport
            .write_report(*id, report_id, data)
            .map_err(DeviceError::Transport)
    }
}

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::HidDevice;

/// A `requestDevice` filter. Absent fields match anything.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeviceFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vendor_id: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_id: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage_page: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FilterError {
    #[error("productId requires vendorId")]
    ProductWithoutVendor,
    #[error("usage requires usagePage")]
    UsageWithoutPage,
}

impl DeviceFilter {
    pub fn vendor_product(vendor_id: u16, product_id: u16) -> Self {
        DeviceFilter {
            vendor_id: Some(vendor_id),
            product_id: Some(product_id),
            ..Default::default()
        }
    }

    pub fn usage(usage_page: u16, usage: u16) -> Self {
        DeviceFilter {
            usage_page: Some(usage_page),
            usage: Some(usage),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), FilterError> {
        if self.product_id.is_some() && self.vendor_id.is_none() {
            return Err(FilterError::ProductWithoutVendor);
        }
        if self.usage.is_some() && self.usage_page.is_none() {
            return Err(FilterError::UsageWithoutPage);
        }
        Ok(())
    }
}

/// True iff every field present in `filter` matches. Usage fields match
/// against any top-level collection of the device.
pub fn matches_filter(device: &HidDevice, filter: &DeviceFilter) -> bool {
    if filter.vendor_id.is_some_and(|v| v != device.vendor_id) {
        return false;
    }
    if filter.product_id.is_some_and(|p| p != device.product_id) {
        return false;
    }
    if filter.usage_page.is_none() && filter.usage.is_none() {
        return true;
    }
    device.descriptor.collections.iter().any(|c| {
        filter.usage_page.is_none_or(|p| p == c.usage_page) && filter.usage.is_none_or(|u| u == c.usage)
    })
}

/// Any-of semantics over a filter list. An empty list matches every device.
pub fn matches_any(device: &HidDevice, filters: &[DeviceFilter]) -> bool {
    filters.is_empty() || filters.iter().any(|f| matches_filter(device, f))
}

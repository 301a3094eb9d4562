use super::item::{DescriptorItem, ItemType};

/// Writes descriptor bytes item by item, picking the shortest payload that
/// holds each value.
///
/// ```
/// use hidwire::descriptor::{DescriptorBuilder, COLLECTION_APPLICATION};
///
/// let bytes = DescriptorBuilder::new()
///     .usage_page(0x01)
///     .usage(0x04)
///     .collection(COLLECTION_APPLICATION)
///     .end_collection()
///     .build();
/// assert_eq!(bytes, [0x05, 0x01, 0x09, 0x04, 0xA1, 0x01, 0xC0]);
/// ```
#[derive(Debug, Clone, Default)]
pub struct DescriptorBuilder {
    bytes: Vec<u8>,
}

fn unsigned_len(value: u32) -> u8 {
    match value {
        0..=0xFF => 1,
        0x100..=0xFFFF => 2,
        _ => 4,
    }
}

fn signed_len(value: i32) -> u8 {
    if i8::try_from(value).is_ok() {
        1
    } else if i16::try_from(value).is_ok() {
        2
    } else {
        4
    }
}

impl DescriptorBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn item(mut self, item_type: ItemType, tag: u8, payload: u32, payload_len: u8) -> Self {
        DescriptorItem::new(item_type, tag, payload, payload_len).encode_into(&mut self.bytes);
        self
    }

    fn unsigned(self, item_type: ItemType, tag: u8, value: u32) -> Self {
        self.item(item_type, tag, value, unsigned_len(value))
    }

    fn signed(self, item_type: ItemType, tag: u8, value: i64) -> Self {
        if value > i64::from(i32::MAX) {
            // Only meaningful for an unsigned Logical Maximum.
            return self.item(item_type, tag, value as u32, 4);
        }
        let value = value as i32;
        self.item(item_type, tag, value as u32, signed_len(value))
    }

    /// Appends raw bytes verbatim.
    pub fn raw(mut self, bytes: &[u8]) -> Self {
        self.bytes.extend_from_slice(bytes);
        self
    }

    pub fn usage_page(self, page: u16) -> Self {
        self.unsigned(ItemType::Global, 0x0, u32::from(page))
    }

    pub fn logical_min(self, value: i64) -> Self {
        self.signed(ItemType::Global, 0x1, value)
    }

    pub fn logical_max(self, value: i64) -> Self {
        self.signed(ItemType::Global, 0x2, value)
    }

    pub fn unit_exponent(self, value: i32) -> Self {
        self.signed(ItemType::Global, 0x5, i64::from(value))
    }

    pub fn unit(self, value: u32) -> Self {
        self.unsigned(ItemType::Global, 0x6, value)
    }

    pub fn report_size(self, bits: u32) -> Self {
        self.unsigned(ItemType::Global, 0x7, bits)
    }

    pub fn report_id(self, id: u8) -> Self {
        self.unsigned(ItemType::Global, 0x8, u32::from(id))
    }

    pub fn report_count(self, count: u32) -> Self {
        self.unsigned(ItemType::Global, 0x9, count)
    }

    pub fn push(self) -> Self {
        self.item(ItemType::Global, 0xA, 0, 0)
    }

    pub fn pop(self) -> Self {
        self.item(ItemType::Global, 0xB, 0, 0)
    }

    pub fn usage(self, id: u16) -> Self {
        self.unsigned(ItemType::Local, 0x0, u32::from(id))
    }

    /// A 32-bit usage carrying its own page.
    pub fn extended_usage(self, page: u16, id: u16) -> Self {
        self.item(ItemType::Local, 0x0, (u32::from(page) << 16) | u32::from(id), 4)
    }

    pub fn usage_min(self, id: u16) -> Self {
        self.unsigned(ItemType::Local, 0x1, u32::from(id))
    }

    pub fn usage_max(self, id: u16) -> Self {
        self.unsigned(ItemType::Local, 0x2, u32::from(id))
    }

    pub fn input(self, flags: u32) -> Self {
        self.unsigned(ItemType::Main, 0x8, flags)
    }

    pub fn output(self, flags: u32) -> Self {
        self.unsigned(ItemType::Main, 0x9, flags)
    }

    pub fn feature(self, flags: u32) -> Self {
        self.unsigned(ItemType::Main, 0xB, flags)
    }

    pub fn collection(self, collection_type: u8) -> Self {
        self.unsigned(ItemType::Main, 0xA, u32::from(collection_type))
    }

    pub fn end_collection(self) -> Self {
        self.item(ItemType::Main, 0xC, 0, 0)
    }

    pub fn build(self) -> Vec<u8> {
        self.bytes
    }
}

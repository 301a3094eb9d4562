//! Short-item tokenizer for HID report descriptors.
//!
//! Every short item starts with a one-byte prefix:
//!
//! ```text
//!  7   6   5   4   3   2   1   0
//! +---+---+---+---+---+---+---+---+
//! |      bTag     | bType | bSize |
//! +---+---+---+---+---+---+---+---+
//! ```
//!
//! `bSize` 0, 1, 2 encode payloads of that many bytes, 3 encodes a 4-byte
//! payload. The prefix `0xFE` introduces a long item, which this crate
//! rejects.

use super::DescriptorError;

/// The prefix byte that introduces a long item.
pub const LONG_ITEM_PREFIX: u8 = 0xFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ItemType {
    Main,
    Global,
    Local,
}

impl ItemType {
    fn bits(self) -> u8 {
        match self {
            ItemType::Main => 0,
            ItemType::Global => 1,
            ItemType::Local => 2,
        }
    }
}

/// One decoded short item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescriptorItem {
    pub tag: u8,
    pub item_type: ItemType,
    /// Little-endian payload, zero-extended to 32 bits.
    pub payload: u32,
    /// Payload size in bytes: 0, 1, 2 or 4.
    pub payload_len: u8,
    /// Offset of the prefix byte within the descriptor.
    pub offset: usize,
}

impl DescriptorItem {
    pub fn new(item_type: ItemType, tag: u8, payload: u32, payload_len: u8) -> Self {
        debug_assert!(matches!(payload_len, 0 | 1 | 2 | 4));
        debug_assert!(tag < 16);
        DescriptorItem {
            tag,
            item_type,
            payload,
            payload_len,
            offset: 0,
        }
    }

    /// Size of the item including its prefix.
    pub fn byte_len(&self) -> usize {
        1 + self.payload_len as usize
    }

    /// Payload read as a two's complement value of its own width.
    pub fn signed_payload(&self) -> i32 {
        match self.payload_len {
            0 => 0,
            1 => self.payload as u8 as i8 as i32,
            2 => self.payload as u16 as i16 as i32,
            _ => self.payload as i32,
        }
    }

    pub fn prefix(&self) -> u8 {
        let size_bits = match self.payload_len {
            0 => 0,
            1 => 1,
            2 => 2,
            _ => 3,
        };
        (self.tag << 4) | (self.item_type.bits() << 2) | size_bits
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        out.push(self.prefix());
        out.extend_from_slice(&self.payload.to_le_bytes()[..self.payload_len as usize]);
    }
}

/// Iterator over the short items of a descriptor.
///
/// Yields an error and then stops on the first malformed item.
pub struct Items<'a> {
    bytes: &'a [u8],
    pos: usize,
    failed: bool,
}

pub fn items(bytes: &[u8]) -> Items<'_> {
    Items {
        bytes,
        pos: 0,
        failed: false,
    }
}

impl<'a> Iterator for Items<'a> {
    type Item = Result<DescriptorItem, DescriptorError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let offset = self.pos;
        let prefix = *self.bytes.get(offset)?;
        if prefix == LONG_ITEM_PREFIX {
            self.failed = true;
            return Some(Err(DescriptorError::LongItemUnsupported { offset }));
        }
        let payload_len: u8 = match prefix & 0x03 {
            3 => 4,
            n => n,
        };
        let item_type = match (prefix >> 2) & 0x03 {
            0 => ItemType::Main,
            1 => ItemType::Global,
            2 => ItemType::Local,
            _ => {
                self.failed = true;
                return Some(Err(DescriptorError::ReservedItem { offset, prefix }));
            }
        };
        let start = offset + 1;
        let end = start + payload_len as usize;
        let Some(raw) = self.bytes.get(start..end) else {
            self.failed = true;
            return Some(Err(DescriptorError::TruncatedItem {
                offset,
                needed: payload_len as usize,
                available: self.bytes.len() - start,
            }));
        };
        let payload = raw
            .iter()
            .rev()
            .fold(0u32, |acc, &b| (acc << 8) | u32::from(b));
        self.pos = end;
        Some(Ok(DescriptorItem {
            tag: prefix >> 4,
            item_type,
            payload,
            payload_len,
            offset,
        }))
    }
}

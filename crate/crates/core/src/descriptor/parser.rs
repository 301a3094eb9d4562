use std::collections::BTreeMap;

use super::item::{items, DescriptorItem, ItemType};
use super::{Collection, DescriptorError, FieldFlags, ReportDescriptor, ReportFieldSpec, ReportKind};
use crate::usage::Usage;

// Main item tags.
const TAG_INPUT: u8 = 0x8;
const TAG_OUTPUT: u8 = 0x9;
const TAG_COLLECTION: u8 = 0xA;
const TAG_FEATURE: u8 = 0xB;
const TAG_END_COLLECTION: u8 = 0xC;

// Global item tags.
const TAG_USAGE_PAGE: u8 = 0x0;
const TAG_LOGICAL_MIN: u8 = 0x1;
const TAG_LOGICAL_MAX: u8 = 0x2;
const TAG_PHYSICAL_MIN: u8 = 0x3;
const TAG_PHYSICAL_MAX: u8 = 0x4;
const TAG_UNIT_EXPONENT: u8 = 0x5;
const TAG_UNIT: u8 = 0x6;
const TAG_REPORT_SIZE: u8 = 0x7;
const TAG_REPORT_ID: u8 = 0x8;
const TAG_REPORT_COUNT: u8 = 0x9;
const TAG_PUSH: u8 = 0xA;
const TAG_POP: u8 = 0xB;

// Local item tags.
const TAG_USAGE: u8 = 0x0;
const TAG_USAGE_MIN: u8 = 0x1;
const TAG_USAGE_MAX: u8 = 0x2;
const TAG_DELIMITER: u8 = 0xA;

const MAX_BIT_SIZE: u32 = 32;

#[derive(Debug, Clone, Default)]
struct Globals {
    usage_page: u16,
    logical_min: Option<DescriptorItem>,
    logical_max: Option<DescriptorItem>,
    unit: Option<u32>,
    unit_exponent: Option<i32>,
    report_size: u32,
    report_count: u32,
    report_id: u8,
}

impl Globals {
    fn logical_range(&self) -> (i64, i64) {
        let min = self.logical_min.map_or(0, |i| i64::from(i.signed_payload()));
        // Logical Maximum is read as signed only when the minimum is negative;
        // otherwise `25 FF` would mean -1 and break nearly every button field.
        let max = self.logical_max.map_or(0, |i| {
            if min < 0 {
                i64::from(i.signed_payload())
            } else {
                i64::from(i.payload)
            }
        });
        (min, max)
    }
}

/// A usage as written in the descriptor. Short usages take their page from
/// the global state at the time the main item is reached.
#[derive(Debug, Clone, Copy)]
struct LocalUsage {
    page: Option<u16>,
    id: u16,
}

impl LocalUsage {
    fn from_item(item: &DescriptorItem) -> Self {
        if item.payload_len == 4 {
            let u = Usage::from_extended(item.payload);
            LocalUsage {
                page: Some(u.page),
                id: u.id,
            }
        } else {
            LocalUsage {
                page: None,
                id: item.payload as u16,
            }
        }
    }

    fn resolve(self, page: u16) -> Usage {
        Usage::new(self.page.unwrap_or(page), self.id)
    }
}

#[derive(Debug, Clone, Copy)]
enum LocalEntry {
    Single(LocalUsage),
    Range(LocalUsage, LocalUsage),
}

#[derive(Debug, Default)]
struct Locals {
    entries: Vec<LocalEntry>,
    pending_min: Option<LocalUsage>,
    pending_max: Option<LocalUsage>,
}

impl Locals {
    fn push_bound(&mut self) {
        if let (Some(min), Some(max)) = (self.pending_min, self.pending_max) {
            self.entries.push(LocalEntry::Range(min, max));
            self.pending_min = None;
            self.pending_max = None;
        }
    }

    fn resolve(&self, page: u16, offset: usize) -> Result<Vec<Usage>, DescriptorError> {
        let mut out = Vec::new();
        for entry in &self.entries {
            match *entry {
                LocalEntry::Single(u) => out.push(u.resolve(page)),
                LocalEntry::Range(min, max) => {
                    let min = min.resolve(page);
                    let max = max.resolve(min.page);
                    if min.id > max.id {
                        return Err(DescriptorError::InvalidField {
                            offset,
                            reason: "usage minimum exceeds usage maximum",
                        });
                    }
                    out.extend((min.id..=max.id).map(|id| Usage::new(min.page, id)));
                }
            }
        }
        Ok(out)
    }
}

struct OpenCollection {
    collection: Collection,
    offset: usize,
}

/// Parses a report descriptor.
///
/// ```
/// use hidwire::descriptor::parse_descriptor;
///
/// let desc = parse_descriptor(&[0x05, 0x01, 0x09, 0x04, 0xA1, 0x01, 0xC0]).unwrap();
/// assert_eq!(desc.collections.len(), 1);
/// assert_eq!((desc.collections[0].usage_page, desc.collections[0].usage), (0x01, 0x04));
/// ```
pub fn parse_descriptor(bytes: &[u8]) -> Result<ReportDescriptor, DescriptorError> {
    let mut globals = Globals::default();
    let mut global_stack: Vec<Globals> = Vec::new();
    let mut locals = Locals::default();
    let mut open: Vec<OpenCollection> = Vec::new();
    let mut top: Vec<Collection> = Vec::new();
    let mut next_bit: BTreeMap<(ReportKind, u8), u32> = BTreeMap::new();
    let mut saw_unnumbered = false;
    let mut saw_numbered = false;

    for item in items(bytes) {
        let item = item?;
        let offset = item.offset;
        match item.item_type {
            ItemType::Main => {
                let kind = match item.tag {
                    TAG_INPUT => Some(ReportKind::Input),
                    TAG_OUTPUT => Some(ReportKind::Output),
                    TAG_FEATURE => Some(ReportKind::Feature),
                    _ => None,
                };
                if let Some(kind) = kind {
                    let Some(current) = open.last_mut() else {
                        return Err(DescriptorError::FieldOutsideCollection { offset });
                    };
                    if globals.report_id == 0 {
                        saw_unnumbered = true;
                    } else {
                        saw_numbered = true;
                    }
                    if saw_unnumbered && saw_numbered {
                        return Err(DescriptorError::MixedReportIds { offset });
                    }
                    let spec = build_field(kind, &globals, &locals, &mut next_bit, offset, item.payload)?;
                    current.collection.fields.push(spec);
                } else {
                    match item.tag {
                        TAG_COLLECTION => {
                            let usage = locals
                                .resolve(globals.usage_page, offset)?
                                .first()
                                .copied()
                                .unwrap_or(Usage::new(globals.usage_page, 0));
                            open.push(OpenCollection {
                                collection: Collection {
                                    usage_page: usage.page,
                                    usage: usage.id,
                                    collection_type: item.payload as u8,
                                    children: Vec::new(),
                                    fields: Vec::new(),
                                },
                                offset,
                            });
                        }
                        TAG_END_COLLECTION => {
                            let Some(done) = open.pop() else {
                                return Err(DescriptorError::UnbalancedCollection {
                                    offset,
                                    detail: "End Collection without an open collection",
                                });
                            };
                            match open.last_mut() {
                                Some(parent) => parent.collection.children.push(done.collection),
                                None => top.push(done.collection),
                            }
                        }
                        tag => {
                            return Err(DescriptorError::UnknownItem {
                                offset,
                                item_type: ItemType::Main,
                                tag,
                            })
                        }
                    }
                }
                locals = Locals::default();
            }
            ItemType::Global => match item.tag {
                TAG_USAGE_PAGE => globals.usage_page = item.payload as u16,
                TAG_LOGICAL_MIN => globals.logical_min = Some(item),
                TAG_LOGICAL_MAX => globals.logical_max = Some(item),
                TAG_PHYSICAL_MIN | TAG_PHYSICAL_MAX => {}
                TAG_UNIT_EXPONENT => globals.unit_exponent = Some(item.signed_payload()),
                TAG_UNIT => globals.unit = Some(item.payload),
                TAG_REPORT_SIZE => globals.report_size = item.payload,
                TAG_REPORT_ID => {
                    if item.payload == 0 || item.payload > 0xFF {
                        return Err(DescriptorError::InvalidReportId { offset });
                    }
                    globals.report_id = item.payload as u8;
                }
                TAG_REPORT_COUNT => globals.report_count = item.payload,
                TAG_PUSH => global_stack.push(globals.clone()),
                TAG_POP => {
                    globals = global_stack
                        .pop()
                        .ok_or(DescriptorError::StackUnderflow { offset })?;
                }
                tag => {
                    return Err(DescriptorError::UnknownItem {
                        offset,
                        item_type: ItemType::Global,
                        tag,
                    })
                }
            },
            ItemType::Local => match item.tag {
                TAG_USAGE => locals
                    .entries
                    .push(LocalEntry::Single(LocalUsage::from_item(&item))),
                TAG_USAGE_MIN => {
                    locals.pending_min = Some(LocalUsage::from_item(&item));
                    locals.push_bound();
                }
                TAG_USAGE_MAX => {
                    locals.pending_max = Some(LocalUsage::from_item(&item));
                    locals.push_bound();
                }
                // Designator and string indexes, delimiters: accepted, not modeled.
                0x3..=0x5 | 0x7..=0x9 | TAG_DELIMITER => {}
                tag => {
                    return Err(DescriptorError::UnknownItem {
                        offset,
                        item_type: ItemType::Local,
                        tag,
                    })
                }
            },
        }
    }

    if let Some(unclosed) = open.last() {
        return Err(DescriptorError::UnbalancedCollection {
            offset: unclosed.offset,
            detail: "collection never closed",
        });
    }

    for (&(kind, report_id), &bits) in &next_bit {
        if bits % 8 != 0 {
            return Err(DescriptorError::MisalignedReport {
                kind,
                report_id,
                bits,
            });
        }
    }

    Ok(ReportDescriptor { collections: top })
}

fn build_field(
    kind: ReportKind,
    globals: &Globals,
    locals: &Locals,
    next_bit: &mut BTreeMap<(ReportKind, u8), u32>,
    offset: usize,
    data: u32,
) -> Result<ReportFieldSpec, DescriptorError> {
    let invalid = |reason| DescriptorError::InvalidField { offset, reason };
    let bit_size = globals.report_size;
    let count = globals.report_count;
    if bit_size == 0 {
        return Err(invalid("report size is zero"));
    }
    if bit_size > MAX_BIT_SIZE {
        return Err(invalid("report size exceeds 32 bits"));
    }
    if count == 0 {
        return Err(invalid("report count is zero"));
    }
    let (logical_min, logical_max) = globals.logical_range();
    if logical_min > logical_max {
        return Err(invalid("logical minimum exceeds logical maximum"));
    }
    let usages = locals.resolve(globals.usage_page, offset)?;

    let cursor = next_bit.entry((kind, globals.report_id)).or_insert(0);
    let bit_offset = *cursor;
    *cursor = bit_size
        .checked_mul(count)
        .and_then(|bits| bits.checked_add(bit_offset))
        .ok_or_else(|| invalid("report length overflows"))?;

    Ok(ReportFieldSpec {
        report_id: globals.report_id,
        kind,
        bit_offset,
        bit_size,
        count,
        logical_min,
        logical_max,
        usages,
        flags: FieldFlags::from_bits(data),
        unit: globals.unit,
        unit_exponent: globals.unit_exponent,
    })
}

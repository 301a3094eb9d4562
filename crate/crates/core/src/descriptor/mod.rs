//! HID report descriptor parsing.
//!
//! [`parse_descriptor`] runs the item state machine of HID 1.11 over a byte
//! stream and produces a [`ReportDescriptor`]: a tree of top-level
//! collections, each owning the [`ReportFieldSpec`]s declared inside it.
//!
//! Global items persist until overwritten (or restored by Pop), local items
//! are cleared after every main item, and each Input/Output/Feature main item
//! emits exactly one field spec.

mod builder;
mod item;
mod parser;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::usage::Usage;

pub use builder::DescriptorBuilder;
pub use item::{items, DescriptorItem, ItemType, Items, LONG_ITEM_PREFIX};
pub use parser::parse_descriptor;
pub use text::{parse_hex_bytes, HexTextError};

pub const COLLECTION_PHYSICAL: u8 = 0x00;
pub const COLLECTION_APPLICATION: u8 = 0x01;
pub const COLLECTION_LOGICAL: u8 = 0x02;
pub const COLLECTION_REPORT: u8 = 0x03;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescriptorError {
    #[error("TruncatedItem: item at offset {offset} needs {needed} payload bytes, {available} available")]
    TruncatedItem {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("UnbalancedCollection: {detail} (offset {offset})")]
    UnbalancedCollection { offset: usize, detail: &'static str },
    #[error("LongItemUnsupported: long item at offset {offset}")]
    LongItemUnsupported { offset: usize },
    #[error("MisalignedReport: {kind} report {report_id:#04x} is {bits} bits, not a multiple of 8")]
    MisalignedReport {
        kind: ReportKind,
        report_id: u8,
        bits: u32,
    },
    #[error("ReservedItem: reserved item type in prefix {prefix:#04x} at offset {offset}")]
    ReservedItem { offset: usize, prefix: u8 },
    #[error("UnknownItem: {item_type:?} tag {tag:#x} at offset {offset}")]
    UnknownItem {
        offset: usize,
        item_type: ItemType,
        tag: u8,
    },
    #[error("StackUnderflow: Pop without matching Push at offset {offset}")]
    StackUnderflow { offset: usize },
    #[error("InvalidReportId: report id 0 is reserved (offset {offset})")]
    InvalidReportId { offset: usize },
    #[error("MixedReportIds: descriptor mixes unnumbered and numbered reports (offset {offset})")]
    MixedReportIds { offset: usize },
    #[error("FieldOutsideCollection: main item at offset {offset} is not inside a collection")]
    FieldOutsideCollection { offset: usize },
    #[error("InvalidField: {reason} (offset {offset})")]
    InvalidField { offset: usize, reason: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Input,
    Output,
    Feature,
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportKind::Input => "input",
            ReportKind::Output => "output",
            ReportKind::Feature => "feature",
        })
    }
}

/// The three data bits of an Input/Output/Feature item this crate acts on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldFlags {
    pub constant: bool,
    pub variable: bool,
    pub relative: bool,
}

impl FieldFlags {
    pub fn from_bits(bits: u32) -> Self {
        FieldFlags {
            constant: bits & 0x01 != 0,
            variable: bits & 0x02 != 0,
            relative: bits & 0x04 != 0,
        }
    }

    pub fn bits(self) -> u32 {
        u32::from(self.constant) | (u32::from(self.variable) << 1) | (u32::from(self.relative) << 2)
    }
}

/// Layout and meaning of one Input/Output/Feature main item.
///
/// `bit_offset` counts from the start of the report body, i.e. after the
/// report id byte when the device uses numbered reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFieldSpec {
    pub report_id: u8,
    pub kind: ReportKind,
    pub bit_offset: u32,
    pub bit_size: u32,
    pub count: u32,
    pub logical_min: i64,
    pub logical_max: i64,
    pub usages: Vec<Usage>,
    pub flags: FieldFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_exponent: Option<i32>,
}

impl ReportFieldSpec {
    pub fn total_bits(&self) -> u32 {
        self.bit_size * self.count
    }

    pub fn end_bit(&self) -> u32 {
        self.bit_offset + self.total_bits()
    }

    pub fn is_signed(&self) -> bool {
        self.logical_min < 0
    }

    /// Usage of element `index` of a variable field. Elements past the end
    /// of the usage list reuse the last usage.
    pub fn usage_for_element(&self, index: u32) -> Option<Usage> {
        self.usages
            .get(index as usize)
            .or_else(|| self.usages.last())
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Collection {
    pub usage_page: u16,
    pub usage: u16,
    pub collection_type: u8,
    pub children: Vec<Collection>,
    pub fields: Vec<ReportFieldSpec>,
}

impl Collection {
    pub fn usage_pair(&self) -> Usage {
        Usage::new(self.usage_page, self.usage)
    }

    /// Depth-first walk over the fields of this collection and its children.
    pub fn all_fields(&self) -> Vec<&ReportFieldSpec> {
        let mut out = Vec::new();
        self.collect_fields(&mut out);
        out
    }

    fn collect_fields<'a>(&'a self, out: &mut Vec<&'a ReportFieldSpec>) {
        out.extend(self.fields.iter());
        for child in &self.children {
            child.collect_fields(out);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDescriptor {
    pub collections: Vec<Collection>,
}

impl ReportDescriptor {
    /// One (page, usage) pair per top-level collection, in declaration order.
    pub fn top_level_usages(&self) -> Vec<Usage> {
        self.collections.iter().map(Collection::usage_pair).collect()
    }

    /// Field specs of one report, in ascending bit offset.
    pub fn fields_for_report(&self, kind: ReportKind, report_id: u8) -> Vec<&ReportFieldSpec> {
        let mut out: Vec<_> = self
            .collections
            .iter()
            .flat_map(Collection::all_fields)
            .filter(|f| f.kind == kind && f.report_id == report_id)
            .collect();
        out.sort_by_key(|f| f.bit_offset);
        out
    }

    pub fn has_report(&self, kind: ReportKind, report_id: u8) -> bool {
        self.collections
            .iter()
            .flat_map(Collection::all_fields)
            .any(|f| f.kind == kind && f.report_id == report_id)
    }

    /// Body length of a report in bytes, or `None` if the report is not declared.
    pub fn report_len(&self, kind: ReportKind, report_id: u8) -> Option<usize> {
        let fields = self.fields_for_report(kind, report_id);
        fields.last().map(|f| (f.end_bit() as usize).div_ceil(8))
    }

    /// Indexes of the top-level collections that declare fields of this report.
    pub fn collections_for_report(&self, kind: ReportKind, report_id: u8) -> Vec<usize> {
        self.collections
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                c.all_fields()
                    .iter()
                    .any(|f| f.kind == kind && f.report_id == report_id)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Sorted, deduplicated report ids declared for `kind`.
    pub fn report_ids(&self, kind: ReportKind) -> Vec<u8> {
        let mut ids: Vec<u8> = self
            .collections
            .iter()
            .flat_map(Collection::all_fields)
            .filter(|f| f.kind == kind)
            .map(|f| f.report_id)
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn uses_report_ids(&self) -> bool {
        self.collections
            .iter()
            .flat_map(Collection::all_fields)
            .any(|f| f.report_id != 0)
    }

    pub fn field_count(&self) -> usize {
        self.collections.iter().map(|c| c.all_fields().len()).sum()
    }
}

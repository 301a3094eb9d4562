//! Report encoding and decoding driven by [`ReportFieldSpec`]s.
//!
//! Bit order is the one HID uses everywhere: bit `n` of a report body lives
//! in byte `n / 8` at position `n % 8` (LSB first), and multi-bit values are
//! little-endian across byte boundaries. [`read_bits`] and [`write_bits`]
//! are the only two places that know this; both codec directions go
//! through them.

use serde::Serialize;
use thiserror::Error;

use crate::descriptor::{ReportDescriptor, ReportFieldSpec, ReportKind};
use crate::usage::Usage;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("BufferTooShort: need {needed} bytes, got {got}")]
    BufferTooShort { needed: usize, got: usize },
    #[error("UnknownReport: no {kind} report with id {report_id:#04x}")]
    UnknownReport { kind: ReportKind, report_id: u8 },
    #[error("IndexOutOfRange: element {index} of a {count}-element field")]
    IndexOutOfRange { index: u32, count: u32 },
    #[error("ArityMismatch: report takes {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("ValueOutOfRange: value {value} at position {position} outside [{min}, {max}]")]
    ValueOutOfRange {
        position: usize,
        value: i64,
        min: i64,
        max: i64,
    },
}

/// One decoded element of a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecodedField {
    /// For variable fields, the element's usage. For array fields, the usage
    /// selected by the value; `None` marks an empty (null) slot.
    pub usage: Option<Usage>,
    pub value: i64,
    pub raw: u32,
    pub in_range: bool,
}

/// Reads `len` (1..=32) bits starting at bit `start`.
pub fn read_bits(data: &[u8], start: u32, len: u32) -> u32 {
    debug_assert!((1..=32).contains(&len));
    let mut value: u64 = 0;
    let first = (start / 8) as usize;
    let last = ((start + len - 1) / 8) as usize;
    for (i, &byte) in data[first..=last].iter().enumerate() {
        value |= u64::from(byte) << (8 * i);
    }
    let value = value >> (start % 8);
    (value & mask(len)) as u32
}

/// Writes the low `len` bits of `value` starting at bit `start`.
pub fn write_bits(data: &mut [u8], start: u32, len: u32, value: u32) {
    debug_assert!((1..=32).contains(&len));
    let shift = start % 8;
    let first = (start / 8) as usize;
    let last = ((start + len - 1) / 8) as usize;
    let bits = (u64::from(value) & mask(len)) << shift;
    let keep = !(mask(len) << shift);
    for (i, byte) in data[first..=last].iter_mut().enumerate() {
        let b = 8 * i;
        *byte = (*byte & (keep >> b) as u8) | (bits >> b) as u8;
    }
}

fn mask(len: u32) -> u64 {
    (1u64 << len) - 1
}

fn sign_extend(raw: u32, bits: u32) -> i64 {
    let shift = 64 - bits;
    ((u64::from(raw) << shift) as i64) >> shift
}

fn bytes_needed(spec: &ReportFieldSpec) -> usize {
    (spec.end_bit() as usize).div_ceil(8)
}

/// Extracts element `index` of `spec` from a report body.
///
/// The result is sign-extended when the field's logical minimum is negative.
///
/// ```
/// use hidwire::codec::extract_field;
/// use hidwire::descriptor::{FieldFlags, ReportFieldSpec, ReportKind};
///
/// let spec = ReportFieldSpec {
///     report_id: 0,
///     kind: ReportKind::Input,
///     bit_offset: 0,
///     bit_size: 8,
///     count: 1,
///     logical_min: -127,
///     logical_max: 127,
///     usages: vec![],
///     flags: FieldFlags::default(),
///     unit: None,
///     unit_exponent: None,
/// };
/// assert_eq!(extract_field(&[0xFF], &spec, 0).unwrap(), -1);
/// ```
pub fn extract_field(data: &[u8], spec: &ReportFieldSpec, index: u32) -> Result<i64, CodecError> {
    extract_raw(data, spec, index).map(|raw| interpret(spec, raw))
}

fn extract_raw(data: &[u8], spec: &ReportFieldSpec, index: u32) -> Result<u32, CodecError> {
    if index >= spec.count {
        return Err(CodecError::IndexOutOfRange {
            index,
            count: spec.count,
        });
    }
    let needed = bytes_needed(spec);
    if data.len() < needed {
        return Err(CodecError::BufferTooShort {
            needed,
            got: data.len(),
        });
    }
    Ok(read_bits(data, spec.bit_offset + index * spec.bit_size, spec.bit_size))
}

fn interpret(spec: &ReportFieldSpec, raw: u32) -> i64 {
    if spec.is_signed() {
        sign_extend(raw, spec.bit_size)
    } else {
        i64::from(raw)
    }
}

/// Decodes every non-constant element of a report body, in layout order.
pub fn decode_report(
    desc: &ReportDescriptor,
    kind: ReportKind,
    report_id: u8,
    data: &[u8],
) -> Result<Vec<DecodedField>, CodecError> {
    let fields = desc.fields_for_report(kind, report_id);
    let Some(last) = fields.last() else {
        return Err(CodecError::UnknownReport { kind, report_id });
    };
    let needed = bytes_needed(last);
    if data.len() < needed {
        return Err(CodecError::BufferTooShort {
            needed,
            got: data.len(),
        });
    }
    let mut out = Vec::new();
    for spec in fields.into_iter().filter(|f| !f.flags.constant) {
        for index in 0..spec.count {
            let raw = extract_raw(data, spec, index)?;
            let value = interpret(spec, raw);
            let in_range = (spec.logical_min..=spec.logical_max).contains(&value);
            let usage = if spec.flags.variable {
                spec.usage_for_element(index)
            } else if in_range {
                usize::try_from(value - spec.logical_min)
                    .ok()
                    .and_then(|i| spec.usages.get(i))
                    .copied()
            } else {
                None
            };
            out.push(DecodedField {
                usage,
                value,
                raw,
                in_range,
            });
        }
    }
    Ok(out)
}

pub fn decode_input_report(
    desc: &ReportDescriptor,
    report_id: u8,
    data: &[u8],
) -> Result<Vec<DecodedField>, CodecError> {
    decode_report(desc, ReportKind::Input, report_id, data)
}

fn fits(spec: &ReportFieldSpec, value: i64) -> bool {
    let bits = spec.bit_size;
    if spec.is_signed() {
        let lo = -(1i64 << (bits - 1));
        let hi = (1i64 << (bits - 1)) - 1;
        (lo..=hi).contains(&value)
    } else {
        (0..=mask(bits) as i64).contains(&value)
    }
}

/// Packs values for every non-constant element of a report into a body.
/// Constant (padding) bits are left zero.
pub fn encode_report(
    desc: &ReportDescriptor,
    kind: ReportKind,
    report_id: u8,
    values: &[i64],
) -> Result<Vec<u8>, CodecError> {
    let fields = desc.fields_for_report(kind, report_id);
    let Some(last) = fields.last() else {
        return Err(CodecError::UnknownReport { kind, report_id });
    };
    let data_fields: Vec<_> = fields.iter().filter(|f| !f.flags.constant).collect();
    let expected: usize = data_fields.iter().map(|f| f.count as usize).sum();
    if values.len() != expected {
        return Err(CodecError::ArityMismatch {
            expected,
            got: values.len(),
        });
    }
    let mut buf = vec![0u8; bytes_needed(last)];
    let mut position = 0;
    for spec in data_fields {
        for index in 0..spec.count {
            let value = values[position];
            if !(spec.logical_min..=spec.logical_max).contains(&value) || !fits(spec, value) {
                return Err(CodecError::ValueOutOfRange {
                    position,
                    value,
                    min: spec.logical_min,
                    max: spec.logical_max,
                });
            }
            write_bits(
                &mut buf,
                spec.bit_offset + index * spec.bit_size,
                spec.bit_size,
                value as u32,
            );
            position += 1;
        }
    }
    Ok(buf)
}

pub fn encode_output_report(
    desc: &ReportDescriptor,
    report_id: u8,
    values: &[i64],
) -> Result<Vec<u8>, CodecError> {
    encode_report(desc, ReportKind::Output, report_id, values)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::descriptor::{parse_descriptor, DescriptorBuilder, FieldFlags, COLLECTION_APPLICATION};

    fn spec(bit_offset: u32, bit_size: u32, count: u32, min: i64, max: i64) -> ReportFieldSpec {
        ReportFieldSpec {
            report_id: 0,
            kind: ReportKind::Input,
            bit_offset,
            bit_size,
            count,
            logical_min: min,
            logical_max: max,
            usages: vec![],
            flags: FieldFlags {
                variable: true,
                ..Default::default()
            },
            unit: None,
            unit_exponent: None,
        }
    }

    // Independent oracle: treat the buffer as one little-endian integer.
    fn oracle_bits(data: &[u8], start: u32, len: u32) -> u128 {
        let whole = data
            .iter()
            .rev()
            .fold(0u128, |acc, &b| (acc << 8) | u128::from(b));
        (whole >> start) & ((1u128 << len) - 1)
    }

    #[test]
    fn sign_extension() {
        assert_eq!(extract_field(&[0xFF], &spec(0, 8, 1, -127, 127), 0).unwrap(), -1);
        assert_eq!(extract_field(&[0xFF], &spec(0, 8, 1, 0, 255), 0).unwrap(), 255);
    }

    #[test]
    fn nibbles() {
        let s = spec(0, 4, 2, 0, 15);
        assert_eq!(oracle_bits(&[0x0F], 0, 4), 15);
        assert_eq!(oracle_bits(&[0x0F], 4, 4), 0);
        assert_eq!(extract_field(&[0x0F], &s, 0).unwrap(), 15);
        assert_eq!(extract_field(&[0x0F], &s, 1).unwrap(), 0);
    }

    #[test]
    fn single_bits() {
        let s = spec(0, 1, 8, 0, 1);
        assert_eq!(oracle_bits(&[0x01], 0, 1), 1);
        assert_eq!(oracle_bits(&[0x01], 7, 1), 0);
        assert_eq!(extract_field(&[0x01], &s, 0).unwrap(), 1);
        assert_eq!(extract_field(&[0x01], &s, 7).unwrap(), 0);
    }

    #[test]
    fn short_buffer_and_bad_index() {
        let s = spec(8, 8, 2, 0, 255);
        assert_eq!(
            extract_field(&[0, 0], &s, 0).unwrap_err(),
            CodecError::BufferTooShort { needed: 3, got: 2 }
        );
        assert!(matches!(
            extract_field(&[0, 0, 0], &s, 2).unwrap_err(),
            CodecError::IndexOutOfRange { .. }
        ));
    }

    fn joystick() -> ReportDescriptor {
        let bytes = DescriptorBuilder::new()
            .usage_page(0x01)
            .usage(0x04)
            .collection(COLLECTION_APPLICATION)
            .logical_min(-127)
            .logical_max(127)
            .report_size(8)
            .report_count(2)
            .usage(0x30)
            .usage(0x31)
            .input(0x02)
            .end_collection()
            .build();
        parse_descriptor(&bytes).unwrap()
    }

    #[test]
    fn joystick_out_of_range_flagged() {
        let got = decode_input_report(&joystick(), 0, &[0x80, 0x7F]).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!((got[0].value, got[0].raw, got[0].in_range), (-128, 0x80, false));
        assert_eq!((got[1].value, got[1].in_range), (127, true));
        assert_eq!(got[1].usage, Some(Usage::new(0x01, 0x31)));
    }

    #[test]
    fn unknown_report() {
        assert_eq!(
            decode_input_report(&joystick(), 3, &[0, 0]).unwrap_err(),
            CodecError::UnknownReport {
                kind: ReportKind::Input,
                report_id: 3
            }
        );
        assert!(matches!(
            encode_output_report(&joystick(), 0, &[]).unwrap_err(),
            CodecError::UnknownReport { .. }
        ));
    }

    fn buttons_and_leds() -> ReportDescriptor {
        // 8 one-bit buttons, then an output report with 5 LEDs + 3 padding
        // bits and an 8-bit level.
        let bytes = DescriptorBuilder::new()
            .usage_page(0x01)
            .usage(0x05)
            .collection(COLLECTION_APPLICATION)
            .usage_page(0x09)
            .usage_min(1)
            .usage_max(8)
            .logical_min(0)
            .logical_max(1)
            .report_size(1)
            .report_count(8)
            .input(0x02)
            .usage_page(0x08)
            .usage_min(1)
            .usage_max(5)
            .report_count(5)
            .output(0x02)
            .report_count(3)
            .output(0x01)
            .logical_max(255)
            .report_size(8)
            .report_count(1)
            .usage(0x4B)
            .output(0x02)
            .end_collection()
            .build();
        parse_descriptor(&bytes).unwrap()
    }

    #[test]
    fn zero_buttons_decode_to_zero() {
        let got = decode_input_report(&buttons_and_leds(), 0, &[0x00]).unwrap();
        assert_eq!(got.len(), 8);
        assert!(got.iter().all(|f| f.value == 0 && f.in_range));
        assert_eq!(got[7].usage, Some(Usage::new(0x09, 8)));
    }

    #[test]
    fn encode_output() {
        let desc = buttons_and_leds();
        assert_eq!(encode_output_report(&desc, 0, &[0; 6]).unwrap(), vec![0, 0]);
        let buf = encode_output_report(&desc, 0, &[1, 0, 1, 0, 1, 200]).unwrap();
        assert_eq!(buf, vec![0b0001_0101, 200]);
        assert_eq!(
            encode_output_report(&desc, 0, &[0, 0, 0, 0, 0, 300]).unwrap_err(),
            CodecError::ValueOutOfRange {
                position: 5,
                value: 300,
                min: 0,
                max: 255
            }
        );
        assert_eq!(
            encode_output_report(&desc, 0, &[0; 5]).unwrap_err(),
            CodecError::ArityMismatch { expected: 6, got: 5 }
        );
    }

    #[test]
    fn array_field_maps_usage_index() {
        // Keyboard-style array: 2 slots of 8 bits, usages 0x04..=0x1D (a..z).
        let bytes = DescriptorBuilder::new()
            .usage_page(0xFF00)
            .usage(0x01)
            .collection(COLLECTION_APPLICATION)
            .usage_page(0x07)
            .usage_min(0x04)
            .usage_max(0x1D)
            .logical_min(1)
            .logical_max(26)
            .report_size(8)
            .report_count(2)
            .input(0x00)
            .end_collection()
            .build();
        let desc = parse_descriptor(&bytes).unwrap();
        let got = decode_input_report(&desc, 0, &[0x00, 0x02]).unwrap();
        assert_eq!(got[0].usage, None);
        assert!(!got[0].in_range);
        assert_eq!(got[1].usage, Some(Usage::new(0x07, 0x05)));
    }

    proptest! {
        #[test]
        fn read_matches_oracle(
            data in proptest::collection::vec(any::<u8>(), 1..12),
            start in 0u32..64,
            len in 1u32..=32,
        ) {
            prop_assume!(start + len <= data.len() as u32 * 8);
            prop_assert_eq!(u128::from(read_bits(&data, start, len)), oracle_bits(&data, start, len));
        }

        #[test]
        fn write_touches_only_target_bits(
            data in proptest::collection::vec(any::<u8>(), 1..12),
            start in 0u32..64,
            len in 1u32..=32,
            value in any::<u32>(),
        ) {
            prop_assume!(start + len <= data.len() as u32 * 8);
            let mut out = data.clone();
            write_bits(&mut out, start, len, value);
            prop_assert_eq!(u64::from(read_bits(&out, start, len)), u64::from(value) & mask(len));
            let total = data.len() as u32 * 8;
            let field = ((1u128 << len) - 1) << start;
            let keep = !field & ((1u128 << total) - 1);
            let whole = |d: &[u8]| d.iter().rev().fold(0u128, |acc, &b| (acc << 8) | u128::from(b));
            prop_assert_eq!(whole(&out) & keep, whole(&data) & keep);
        }

        #[test]
        fn padding_is_neutral(leds in 0u8..32, pad in 0u8..8, level in any::<u8>()) {
            let desc = buttons_and_leds();
            let clean = [leds, level];
            let dirty = [leds | (pad << 5), level];
            prop_assert_eq!(
                decode_report(&desc, ReportKind::Output, 0, &clean).unwrap(),
                decode_report(&desc, ReportKind::Output, 0, &dirty).unwrap()
            );
        }
    }
}

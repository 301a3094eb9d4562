//! Seeded generators and reference models shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use hidwire::descriptor::{DescriptorBuilder, ReportKind, COLLECTION_APPLICATION};
use hidwire::device::{DeviceInfo, Registry};
use hidwire::jump::JumpConfig;
use hidwire::transport::SimTransport;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

// ---------------------------------------------------------------------------
// Descriptors, written item by item without the library's builder.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedField {
    pub kind: ReportKind,
    pub report_id: u8,
    pub bit_offset: u32,
    pub bit_size: u32,
    pub count: u32,
    pub logical_min: i64,
    pub logical_max: i64,
    pub constant: bool,
}

pub struct GeneratedDescriptor {
    pub bytes: Vec<u8>,
    /// Input/Output/Feature items emitted.
    pub main_items: usize,
    pub fields: Vec<ExpectedField>,
}

fn short_item(out: &mut Vec<u8>, tag_and_type: u8, payload: &[u8]) {
    let size_code = match payload.len() {
        0 => 0,
        1 => 1,
        2 => 2,
        4 => 3,
        n => panic!("bad payload length {n}"),
    };
    out.push(tag_and_type | size_code);
    out.extend_from_slice(payload);
}

fn signed_payload(v: i64) -> Vec<u8> {
    if i8::try_from(v).is_ok() {
        vec![v as i8 as u8]
    } else if i16::try_from(v).is_ok() {
        (v as i16).to_le_bytes().to_vec()
    } else {
        (v as i32).to_le_bytes().to_vec()
    }
}

fn unsigned_payload(v: u64) -> Vec<u8> {
    if v <= 0xFF {
        vec![v as u8]
    } else if v <= 0xFFFF {
        (v as u16).to_le_bytes().to_vec()
    } else {
        (v as u32).to_le_bytes().to_vec()
    }
}

const USAGE_PAGE: u8 = 0x04;
const LOGICAL_MIN: u8 = 0x14;
const LOGICAL_MAX: u8 = 0x24;
const REPORT_SIZE: u8 = 0x74;
const REPORT_ID: u8 = 0x84;
const REPORT_COUNT: u8 = 0x94;
const PUSH: u8 = 0xA4;
const POP: u8 = 0xB4;
const USAGE: u8 = 0x08;
const USAGE_MIN: u8 = 0x18;
const USAGE_MAX: u8 = 0x28;
const COLLECTION: u8 = 0xA0;
const END_COLLECTION: u8 = 0xC0;

fn main_tag(kind: ReportKind) -> u8 {
    match kind {
        ReportKind::Input => 0x80,
        ReportKind::Output => 0x90,
        ReportKind::Feature => 0xB0,
    }
}

/// Random logical range representable in `size` bits.
fn logical_range(rng: &mut StdRng, size: u32) -> (i64, i64) {
    if rng.gen_bool(0.4) {
        let lo = -(1i64 << (size - 1));
        let hi = (1i64 << (size - 1)) - 1;
        let min = rng.gen_range(lo..=-1);
        (min, rng.gen_range(min..=hi))
    } else {
        let hi = (1i64 << size) - 1;
        let min = rng.gen_range(0..=hi.min(1000));
        (min, rng.gen_range(min..=hi))
    }
}

/// A random well-formed descriptor and the report layout it should produce.
pub fn generate_descriptor(rng: &mut StdRng) -> GeneratedDescriptor {
    let mut out = Vec::new();
    let ids: Vec<u8> = if rng.gen_bool(0.5) {
        let mut ids: Vec<u8> = (1..=255).collect();
        ids.shuffle(rng);
        ids.truncate(rng.gen_range(1..=3));
        ids
    } else {
        vec![0]
    };
    let mut cursors: Vec<((ReportKind, u8), u32)> = Vec::new();
    let mut fields = Vec::new();
    let kinds = [ReportKind::Input, ReportKind::Output, ReportKind::Feature];

    let top_levels = rng.gen_range(1..=3);
    for t in 0..top_levels {
        short_item(&mut out, USAGE_PAGE, &unsigned_payload(rng.gen_range(1..=0xFFFEu64)));
        short_item(&mut out, USAGE, &unsigned_payload(rng.gen_range(0..=0xFFFFu64)));
        short_item(&mut out, COLLECTION, &[0x01]);
        let mut depth = 0;
        for _ in 0..rng.gen_range(0..=6) {
            if rng.gen_bool(0.2) {
                short_item(&mut out, USAGE, &[0x01]);
                short_item(&mut out, COLLECTION, &[0x00]);
                depth += 1;
            }
            if rng.gen_bool(0.1) {
                // Clobbered size inside push/pop must not leak.
                short_item(&mut out, PUSH, &[]);
                short_item(&mut out, REPORT_SIZE, &[0x05]);
                short_item(&mut out, POP, &[]);
            }
            let kind = kinds[rng.gen_range(0..3)];
            let report_id = ids[rng.gen_range(0..ids.len())];
            let size = rng.gen_range(1..=32u32);
            let count = rng.gen_range(1..=5u32);
            let (min, max) = logical_range(rng, size);
            let constant = rng.gen_bool(0.15);
            if report_id != 0 {
                short_item(&mut out, REPORT_ID, &[report_id]);
            }
            short_item(&mut out, LOGICAL_MIN, &signed_payload(min));
            if min < 0 {
                short_item(&mut out, LOGICAL_MAX, &signed_payload(max));
            } else {
                short_item(&mut out, LOGICAL_MAX, &unsigned_payload(max as u64));
            }
            short_item(&mut out, REPORT_SIZE, &unsigned_payload(u64::from(size)));
            short_item(&mut out, REPORT_COUNT, &unsigned_payload(u64::from(count)));
            if rng.gen_bool(0.5) {
                short_item(&mut out, USAGE_MIN, &[0x01]);
                short_item(&mut out, USAGE_MAX, &unsigned_payload(rng.gen_range(1..=16u64)));
            } else {
                for _ in 0..rng.gen_range(0..=count) {
                    short_item(&mut out, USAGE, &unsigned_payload(rng.gen_range(1..=0xFFu64)));
                }
            }
            // Data/Constant, Array/Variable, Absolute/Relative.
            let flags = u8::from(constant) | (u8::from(rng.gen_bool(0.8)) << 1) | (u8::from(rng.gen_bool(0.2)) << 2);
            short_item(&mut out, main_tag(kind), &[flags]);

            let key = (kind, report_id);
            let cursor = match cursors.iter_mut().find(|(k, _)| *k == key) {
                Some((_, c)) => c,
                None => {
                    cursors.push((key, 0));
                    &mut cursors.last_mut().unwrap().1
                }
            };
            fields.push(ExpectedField {
                kind,
                report_id,
                bit_offset: *cursor,
                bit_size: size,
                count,
                logical_min: min,
                logical_max: max,
                constant,
            });
            *cursor += size * count;
        }
        if t + 1 == top_levels {
            // Pad every report to a byte boundary.
            for &((kind, report_id), bits) in &cursors.clone() {
                let pad = (8 - bits % 8) % 8;
                if pad == 0 {
                    continue;
                }
                if report_id != 0 {
                    short_item(&mut out, REPORT_ID, &[report_id]);
                }
                short_item(&mut out, LOGICAL_MIN, &[0]);
                short_item(&mut out, LOGICAL_MAX, &[0]);
                short_item(&mut out, REPORT_SIZE, &[pad as u8]);
                short_item(&mut out, REPORT_COUNT, &[1]);
                short_item(&mut out, main_tag(kind), &[0x03]);
                fields.push(ExpectedField {
                    kind,
                    report_id,
                    bit_offset: bits,
                    bit_size: pad,
                    count: 1,
                    logical_min: 0,
                    logical_max: 0,
                    constant: true,
                });
            }
        }
        out.extend(std::iter::repeat_n(END_COLLECTION, depth + 1));
    }
    let main_items = fields.len();
    GeneratedDescriptor {
        bytes: out,
        main_items,
        fields,
    }
}

// ---------------------------------------------------------------------------
// Registries.

/// Top-level usages a random device may declare.
pub const PROFILES: [(u16, u16); 8] = [
    (0x01, 0x06), // keyboard
    (0x01, 0x02), // mouse
    (0x01, 0x07), // keypad
    (0xF1D0, 0x01),
    (0x01, 0x04), // joystick
    (0x01, 0x05), // game pad
    (0xFF00, 0x01),
    (0x0C, 0x01), // consumer control
];

pub fn is_blocked(page: u16, usage: u16) -> bool {
    page == 0xF1D0 || (page == 0x01 && matches!(usage, 0x02 | 0x06 | 0x07))
}

/// One top-level collection per usage, collection `i` owning input and
/// output report `i + 1`.
pub fn composite_descriptor(usages: &[(u16, u16)]) -> Vec<u8> {
    let mut b = DescriptorBuilder::new();
    for (i, &(page, usage)) in usages.iter().enumerate() {
        let id = i as u8 + 1;
        b = b
            .usage_page(page)
            .usage(usage)
            .collection(COLLECTION_APPLICATION)
            .report_id(id)
            .logical_min(0)
            .logical_max(255)
            .report_size(8)
            .report_count(2)
            .usage(1)
            .input(0x02)
            .usage(2)
            .output(0x02)
            .end_collection();
    }
    b.build()
}

pub struct RandomDevice {
    pub info: DeviceInfo,
    pub usages: Vec<(u16, u16)>,
}

impl RandomDevice {
    pub fn fully_protected(&self) -> bool {
        self.usages.iter().all(|&(p, u)| is_blocked(p, u))
    }
}

pub fn random_device(rng: &mut StdRng) -> RandomDevice {
    let n = rng.gen_range(1..=3);
    let usages: Vec<(u16, u16)> = (0..n).map(|_| PROFILES[rng.gen_range(0..PROFILES.len())]).collect();
    let bytes = composite_descriptor(&usages);
    let descriptor = hidwire::descriptor::parse_descriptor(&bytes).expect("composite descriptor parses");
    // A small id space so twins (same vendor and product) occur.
    let vendor_id = [0x057e, 0x054c, 0x046d, 0x1050][rng.gen_range(0..4)];
    let product_id = rng.gen_range(0x2000..0x2004);
    RandomDevice {
        info: DeviceInfo {
            vendor_id,
            product_id,
            product_name: format!("device {vendor_id:04x}:{product_id:04x}"),
            descriptor,
        },
        usages,
    }
}

pub fn random_registry(rng: &mut StdRng) -> (Registry<SimTransport>, Vec<RandomDevice>) {
    let mut registry = Registry::default();
    let devices: Vec<RandomDevice> = (0..rng.gen_range(0..=8)).map(|_| random_device(rng)).collect();
    for d in &devices {
        registry.connect(d.info.clone());
    }
    (registry, devices)
}

pub fn random_filters(rng: &mut StdRng) -> Vec<hidwire::device::DeviceFilter> {
    use hidwire::device::DeviceFilter;
    (0..rng.gen_range(0..=3))
        .map(|_| match rng.gen_range(0..4) {
            0 => DeviceFilter::default(),
            1 => DeviceFilter {
                vendor_id: Some([0x057e, 0x054c, 0x046d, 0x1050][rng.gen_range(0..4)]),
                ..DeviceFilter::default()
            },
            2 => DeviceFilter::vendor_product(0x057e, rng.gen_range(0x2000..0x2004)),
            _ => {
                let (page, usage) = PROFILES[rng.gen_range(0..PROFILES.len())];
                DeviceFilter::usage(page, usage)
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Jump traces.

/// Accelerometer magnitudes at 5 ms spacing: rest near 1 g, spikes of
/// random height and width, some closer together than the debounce window,
/// and dwell inside the hysteresis band.
pub fn random_magnitude_trace(rng: &mut StdRng) -> Vec<(u64, f64)> {
    let mut t = 0;
    let mut out = Vec::new();
    let mut push = |t: &mut u64, m: f64| {
        out.push((*t, m));
        *t += 5;
    };
    for _ in 0..rng.gen_range(0..=12) {
        for _ in 0..rng.gen_range(1..80) {
            push(&mut t, 1.0 + rng.gen_range(-0.08..0.08));
        }
        for _ in 0..rng.gen_range(1..8) {
            let m = match rng.gen_range(0..10) {
                0..=5 => rng.gen_range(1.81..3.5),
                6..=8 => rng.gen_range(1.2..=1.8),
                _ => rng.gen_range(0.5..1.19),
            };
            push(&mut t, m);
        }
    }
    out
}

/// Reference event times by run-collapsing. Label samples high (> t_high),
/// low (< t_low) or mid; drop the mids; every maximal run of highs is one
/// excursion whose first sample is a candidate. Candidates closer than
/// `debounce_ms` to the previous accepted one are dropped.
pub fn cluster_oracle(samples: &[(u64, f64)], config: &JumpConfig) -> Vec<u64> {
    let labelled: Vec<(u64, bool)> = samples
        .iter()
        .filter_map(|&(t, m)| {
            if m > config.t_high_g {
                Some((t, true))
            } else if m < config.t_low_g {
                Some((t, false))
            } else {
                None
            }
        })
        .collect();
    let mut candidates = Vec::new();
    for (i, &(t, high)) in labelled.iter().enumerate() {
        if high && (i == 0 || !labelled[i - 1].1) {
            candidates.push(t);
        }
    }
    let mut accepted: Vec<u64> = Vec::new();
    for t in candidates {
        if accepted.last().is_none_or(|&prev| t - prev >= config.debounce_ms) {
            accepted.push(t);
        }
    }
    accepted
}

//! Host-side HID toolkit: report descriptors, report codec, a WebHID-style
//! device model with filters and single-device grants, a Joy-Con driver and
//! an accelerometer jump detector, all over a deterministic simulated
//! transport.

pub mod codec;
pub mod descriptor;
pub mod device;
pub mod joycon;
pub mod jump;
pub mod sim;
pub mod stream;
pub mod transport;
pub mod usage;

// The guide's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/descriptors.md")]
    mod descriptors {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/devices.md")]
    mod devices {}
    #[doc = include_str!("../../../book/src/replay.md")]
    mod replay {}
    #[doc = include_str!("../../../book/src/joycon.md")]
    mod joycon {}
    #[doc = include_str!("../../../book/src/jumps.md")]
    mod jumps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

use crate::usage::{Usage, PAGE_FIDO, PAGE_GENERIC_DESKTOP, USAGE_KEYBOARD, USAGE_KEYPAD, USAGE_MOUSE};

/// Top-level usages whose reports a client may never read or write.
/// The whole FIDO page is blocked in addition to these.
pub const PROTECTED_USAGES: [Usage; 3] = [
    Usage::new(PAGE_GENERIC_DESKTOP, USAGE_MOUSE),
    Usage::new(PAGE_GENERIC_DESKTOP, USAGE_KEYBOARD),
    Usage::new(PAGE_GENERIC_DESKTOP, USAGE_KEYPAD),
];

pub fn is_protected(usage_page: u16, usage: u16) -> bool {
    usage_page == PAGE_FIDO || PROTECTED_USAGES.contains(&Usage::new(usage_page, usage))
}

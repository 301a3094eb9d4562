use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid hex byte {token:?} (token {index})")]
pub struct HexTextError {
    pub index: usize,
    pub token: String,
}

/// Reads descriptor text such as `05 01, 09 04 A1 01 C0` into bytes.
///
/// Tokens are separated by whitespace or commas; each is one byte written
/// as one or two hex digits with an optional `0x` prefix.
pub fn parse_hex_bytes(text: &str) -> Result<Vec<u8>, HexTextError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(index, token)| {
            let digits = token
                .strip_prefix("0x")
                .or_else(|| token.strip_prefix("0X"))
                .unwrap_or(token);
            if digits.is_empty() || digits.len() > 2 {
                return Err(HexTextError {
                    index,
                    token: token.to_owned(),
                });
            }
            u8::from_str_radix(digits, 16).map_err(|_| HexTextError {
                index,
                token: token.to_owned(),
            })
        })
        .collect()
}

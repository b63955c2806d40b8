// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Meeting security codes.
//!
//! The code shown to every participant is derived from the host's public
//! identity key as
//!
//! ```text
//! Digits(SHA256(SHA256("Zoombase-1-ClientOnly-MAC-SecurityCode") || SHA256(key)))
//! ```
//!
//! where `Digits` reads the 256-bit digest as a big-endian unsigned integer,
//! reduces it modulo 10^40 and renders the remainder as 40 zero-padded
//! decimal digits. The result is displayed as eight space-separated groups
//! of five digits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Context string hashed into every security code.
pub const CODE_CONTEXT: &[u8] = b"Zoombase-1-ClientOnly-MAC-SecurityCode";

pub const CODE_LEN: usize = 40;
pub const BLOCK_LEN: usize = 5;
pub const KEY_LEN: usize = 32;

/// A host's public identity verification key.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IdentityKey([u8; KEY_LEN]);

impl IdentityKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; KEY_LEN] = bytes
            .try_into()
            .map_err(|_| Error::KeyFormat(bytes.len()))?;
        Ok(IdentityKey(arr))
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bytes = hex::decode(text.trim()).map_err(|e| Error::KeyHex(e.to_string()))?;
        Self::from_bytes(&bytes)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut bytes = [0u8; KEY_LEN];
        rng.fill(&mut bytes);
        IdentityKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; KEY_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for IdentityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IdentityKey({})", self.to_hex())
    }
}

/// Forty decimal digits, most significant first.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SecurityCode([u8; CODE_LEN]);

impl SecurityCode {
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() != CODE_LEN {
            return Err(Error::CodeParse(format!(
                "expected {CODE_LEN} digits, got {}",
                digits.len()
            )));
        }
        if let Some(d) = digits.iter().find(|&&d| d > 9) {
            return Err(Error::CodeParse(format!("{d} is not a decimal digit")));
        }
        let mut arr = [0u8; CODE_LEN];
        arr.copy_from_slice(digits);
        Ok(SecurityCode(arr))
    }

    pub fn digits(&self) -> &[u8; CODE_LEN] {
        &self.0
    }

    /// Count of each digit value; entry `d` holds how often `d` occurs.
    pub fn digit_multiset(&self) -> [usize; 10] {
        let mut counts = [0usize; 10];
        for &d in &self.0 {
            counts[d as usize] += 1;
        }
        counts
    }

    pub fn contains_all_digits(&self) -> bool {
        self.digit_multiset().iter().all(|&c| c > 0)
    }

    pub fn contains(&self, digit: u8) -> bool {
        self.0.contains(&digit)
    }

    /// The canonical 47-character display form.
    pub fn format(&self) -> String {
        let mut out = String::with_capacity(CODE_LEN + CODE_LEN / BLOCK_LEN - 1);
        for (i, block) in self.0.chunks(BLOCK_LEN).enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.extend(block.iter().map(|&d| char::from(b'0' + d)));
        }
        out
    }

    /// Accepts 40 digits separated by any amount of whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        let mut digits = Vec::with_capacity(CODE_LEN);
        for c in text.chars().filter(|c| !c.is_whitespace()) {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::CodeParse(format!("unexpected character {c:?}")))?;
            digits.push(d as u8);
        }
        Self::from_digits(&digits)
    }
}

impl fmt::Display for SecurityCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

impl fmt::Debug for SecurityCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecurityCode({})", self.format())
    }
}

impl FromStr for SecurityCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for SecurityCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.format())
    }
}

impl<'de> Deserialize<'de> for SecurityCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        SecurityCode::parse(&text).map_err(serde::de::Error::custom)
    }
}

pub fn derive_security_code(key: &IdentityKey) -> SecurityCode {
    let mut outer = Sha256::new();
    outer.update(Sha256::digest(CODE_CONTEXT));
    outer.update(Sha256::digest(key.as_bytes()));
    let digest: [u8; 32] = outer.finalize().into();
    digest_to_digits(&digest)
}

pub fn format_code(code: &SecurityCode) -> String {
    code.format()
}

pub fn parse_code(text: &str) -> Result<SecurityCode> {
    SecurityCode::parse(text)
}

/// Low 40 decimal digits of a big-endian 256-bit integer.
fn digest_to_digits(digest: &[u8; 32]) -> SecurityCode {
    const CHUNK: u64 = 10_000_000_000_000_000_000; // 10^19
    const CHUNK_DIGITS: usize = 19;

    let mut limbs: [u64; 4] = std::array::from_fn(|i| {
        u64::from_be_bytes(digest[i * 8..i * 8 + 8].try_into().expect("8-byte slice"))
    });

    // Least significant digit first.
    let mut low_first = Vec::with_capacity(CODE_LEN + CHUNK_DIGITS);
    while low_first.len() < CODE_LEN {
        let mut rem: u128 = 0;
        for limb in limbs.iter_mut() {
            let cur = (rem << 64) | u128::from(*limb);
            *limb = (cur / u128::from(CHUNK)) as u64;
            rem = cur % u128::from(CHUNK);
        }
        let mut rem = rem as u64;
        for _ in 0..CHUNK_DIGITS {
            low_first.push((rem % 10) as u8);
            rem /= 10;
        }
    }

    let mut digits = [0u8; CODE_LEN];
    for (i, d) in low_first.iter().take(CODE_LEN).enumerate() {
        digits[CODE_LEN - 1 - i] = *d;
    }
    SecurityCode(digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MALE_1: &str = "40008 55812 36183 49046 68787 34111 34371 14180";

    #[test]
    fn context_is_38_ascii_bytes() {
        assert_eq!(CODE_CONTEXT.len(), 38);
        assert!(CODE_CONTEXT.is_ascii());
    }

    #[test]
    fn key_length_is_enforced() {
        assert!(matches!(
            IdentityKey::from_bytes(&[0; 31]),
            Err(Error::KeyFormat(31))
        ));
        assert!(matches!(
            IdentityKey::from_bytes(&[0; 33]),
            Err(Error::KeyFormat(33))
        ));
        assert!(IdentityKey::from_hex(&"ab".repeat(32)).is_ok());
        assert!(IdentityKey::from_hex("zz").is_err());
    }

    #[test]
    fn formats_table_codes() {
        let digits: Vec<u8> = MALE_1
            .bytes()
            .filter(u8::is_ascii_digit)
            .map(|b| b - b'0')
            .collect();
        let code = SecurityCode::from_digits(&digits).unwrap();
        assert_eq!(format_code(&code), MALE_1);

        let zero = SecurityCode::from_digits(&[0; 40]).unwrap();
        assert_eq!(
            zero.format(),
            "00000 00000 00000 00000 00000 00000 00000 00000"
        );
        assert_eq!(zero.format().len(), 47);

        let code = parse_code("7147301124176188997205385350760560812065").unwrap();
        assert_eq!(
            code.format(),
            "71473 01124 17618 89972 05385 35076 05608 12065"
        );
    }

    #[test]
    fn parse_accepts_whitespace_and_rejects_garbage() {
        let code = parse_code("25088 17100 06194 63649 83034 21827 79601 84031").unwrap();
        assert_eq!(&code.digits()[..5], &[2, 5, 0, 8, 8]);
        assert_eq!(parse_code(&"0".repeat(40)).unwrap().digits(), &[0; 40]);
        assert!(matches!(parse_code("1234"), Err(Error::CodeParse(_))));
        assert!(matches!(
            parse_code(&format!("{}x", "1".repeat(39))),
            Err(Error::CodeParse(_))
        ));
        assert!(matches!(
            parse_code(&"1".repeat(41)),
            Err(Error::CodeParse(_))
        ));
    }

    #[test]
    fn digit_multiset_of_table_code() {
        let counts = parse_code(MALE_1).unwrap().digit_multiset();
        // Hand count of the printed code.
        assert_eq!(counts, [5, 8, 1, 5, 6, 2, 3, 3, 6, 1]);
        assert_eq!(counts.iter().sum::<usize>(), 40);
        assert!(parse_code(MALE_1).unwrap().contains_all_digits());

        let zero = SecurityCode::from_digits(&[0; 40]).unwrap();
        assert_eq!(zero.digit_multiset(), [40, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(!zero.contains_all_digits());
    }

    #[test]
    fn digits_of_small_and_large_values() {
        let mut digest = [0u8; 32];
        digest[31] = 123;
        let mut expect = [0u8; 40];
        expect[37..].copy_from_slice(&[1, 2, 3]);
        assert_eq!(digest_to_digits(&digest).digits(), &expect);

        // Low 40 digits of 2^256 - 1.
        let all_ones = [0xFFu8; 32];
        assert_eq!(
            digest_to_digits(&all_ones).format(),
            "32699 84665 64056 40394 57584 00791 31296 39935"
        );
    }
}

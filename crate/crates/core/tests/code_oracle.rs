// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

use ceremony_sim::code::{
    derive_security_code, format_code, parse_code, IdentityKey, SecurityCode, CODE_CONTEXT,
};
use num_bigint::BigUint;
use proptest::prelude::*;
use sha2::{Digest, Sha256};

/// Independent reference: the digest as a big integer, reduced mod 10^40.
fn oracle(key: &[u8; 32]) -> String {
    let mut h = Sha256::new();
    h.update(Sha256::digest(CODE_CONTEXT));
    h.update(Sha256::digest(key));
    let n = BigUint::from_bytes_be(&h.finalize()) % BigUint::from(10u32).pow(40);
    format!("{n:0>40}")
}

fn bare(code: &SecurityCode) -> String {
    code.digits().iter().map(|d| char::from(b'0' + d)).collect()
}

#[test]
fn frozen_goldens() {
    let zero = derive_security_code(&IdentityKey::from_bytes(&[0; 32]).unwrap());
    assert_eq!(
        zero.format(),
        "39962 64396 34983 58855 60708 66040 02674 42528"
    );
    let ones = derive_security_code(&IdentityKey::from_bytes(&[0xff; 32]).unwrap());
    assert_eq!(
        ones.format(),
        "53101 24612 53872 19543 61398 37833 45156 27403"
    );
}

#[test]
fn low_digits_of_max_digest() {
    let n = (BigUint::from(1u8) << 256u32) - 1u8;
    let low = n % BigUint::from(10u32).pow(40);
    assert_eq!(
        format!("{low:0>40}"),
        "3269984665640564039457584007913129639935"
    );
}

#[test]
fn table_codes_parse_and_count() {
    let c = parse_code("40008 55812 36183 49046 68787 34111 34371 14180").unwrap();
    assert_eq!(c.digit_multiset(), [5, 8, 1, 5, 6, 2, 3, 3, 6, 1]);
    assert!(c.contains_all_digits());
    assert_eq!(
        format_code(&c),
        "40008 55812 36183 49046 68787 34111 34371 14180"
    );
}

#[test]
fn parsing_tolerates_separators_but_not_bad_digits() {
    assert_eq!(parse_code(&"0".repeat(40)).unwrap().digits(), &[0u8; 40]);
    let spaced = parse_code("4000855812 36183 49046 68787 34111 34371 14180").unwrap();
    assert_eq!(
        spaced.format(),
        "40008 55812 36183 49046 68787 34111 34371 14180"
    );
    for bad in [
        "",
        "1234",
        "40008 55812 36183 49046 68787 34111 34371",
        "40008 55812 36183 49046 68787 34111 34371 1418a",
        "40008 55812 36183 49046 68787 34111 34371 141800",
    ] {
        assert!(parse_code(bad).is_err(), "{bad:?}");
    }
}

#[test]
fn avalanche() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let trials = 1000;
    let mut changed = 0;
    for _ in 0..trials {
        let mut key = [0u8; 32];
        rng.fill(&mut key);
        let before = derive_security_code(&IdentityKey::from_bytes(&key).unwrap());
        let bit = rng.gen_range(0..256);
        key[bit / 8] ^= 1 << (bit % 8);
        if derive_security_code(&IdentityKey::from_bytes(&key).unwrap()) != before {
            changed += 1;
        }
    }
    assert!(changed as f64 / trials as f64 >= 0.99);
}

proptest! {
    #[test]
    fn matches_oracle(key in proptest::array::uniform32(any::<u8>())) {
        let code = derive_security_code(&IdentityKey::from_bytes(&key).unwrap());
        prop_assert_eq!(bare(&code), oracle(&key));
        prop_assert_eq!(code, derive_security_code(&IdentityKey::from_bytes(&key).unwrap()));
    }

    #[test]
    fn format_parse_round_trip(digits in proptest::collection::vec(0u8..10, 40)) {
        let code = SecurityCode::from_digits(&digits).unwrap();
        let text = format_code(&code);
        prop_assert_eq!(text.len(), 47);
        prop_assert_eq!(text.split(' ').count(), 8);
        prop_assert_eq!(parse_code(&text).unwrap(), code);
        prop_assert_eq!(format_code(&parse_code(&text).unwrap()), text);
    }
}

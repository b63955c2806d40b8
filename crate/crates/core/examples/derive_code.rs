// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Security codes from identity keys, and how often a code contains every digit.
//!
//! cargo run --example derive_code -- [seed]

use ceremony_sim::code::{derive_security_code, IdentityKey};
use ceremony_sim::rng::labeled_rng;

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let mut rng = labeled_rng(seed, "example/keys");

    for _ in 0..4 {
        let key = IdentityKey::random(&mut rng);
        let code = derive_security_code(&key);
        println!("{}  {code}", &key.to_hex()[..16]);
    }

    let trials = 10_000;
    let complete = (0..trials)
        .filter(|_| derive_security_code(&IdentityKey::random(&mut rng)).contains_all_digits())
        .count();
    println!("codes containing all ten digits: {complete}/{trials}");
}

// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::sync::OnceLock;

use ceremony_sim::corpus::{Corpus, SyntheticCorpus};
use ceremony_sim::scenario::ScenarioConfig;

/// The default six-speaker synthetic corpus, built once per test binary.
pub fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| SyntheticCorpus::default().build())
}

pub fn speakers() -> Vec<String> {
    corpus().speakers().map(String::from).collect()
}

/// Baseline scenario whose victim code covers every digit.
pub fn baseline(speaker: &str) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.victim.speaker = speaker.to_string();
    c.victim.require_all_digits = true;
    c
}

pub const FIXTURE_ORIGINAL: [&str; 3] = [
    "40008 55812 36183 49046 68787 34111 34371 14180",
    "71473 01124 17618 89972 05385 35076 05608 12065",
    "25088 17100 06194 63649 83034 21827 79601 84031",
];

pub const FIXTURE_REORDERED: [&str; 3] = [
    "15496 82758 80794 35046 66332 13296 70910 85912",
    "44618 84509 13996 12990 53598 89281 53073 85236",
    "14815 60480 57325 94843 74452 98530 15305 10392",
];

// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Endpointing a 40-digit announcement and comparing with the true boundaries.
//!
//! cargo run --example segment_announcement -- [seed]

use ceremony_sim::code::{derive_security_code, IdentityKey};
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::rng::labeled_rng;
use ceremony_sim::segment::{detect_regions, SegmentationParams};
use ceremony_sim::splice::{synthesize_code_audio, DEFAULT_GAP_MS};

fn main() -> ceremony_sim::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let corpus = SyntheticCorpus::default().build();
    let code = derive_security_code(&IdentityKey::random(&mut labeled_rng(
        seed,
        "example/segment",
    )));
    let (clip, truth) = synthesize_code_audio(corpus.library("evan")?, &code, DEFAULT_GAP_MS)?;

    let regions = detect_regions(&clip, &SegmentationParams::default())?;
    println!("{code}");
    println!("found {} of {} utterances", regions.len(), truth.len());
    let worst = regions
        .iter()
        .zip(&truth)
        .map(|(r, t)| r.start.abs_diff(t.start).max(r.end.abs_diff(t.end)))
        .max()
        .unwrap_or(0);
    println!(
        "worst boundary error: {worst} samples ({:.1} ms)",
        worst as f64 * 1000.0 / f64::from(clip.sample_rate())
    );
    Ok(())
}

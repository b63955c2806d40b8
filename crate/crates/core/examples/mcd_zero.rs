// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Cepstral distortion of spliced digits against their source, and against another voice.
//!
//! cargo run --example mcd_zero

use ceremony_sim::cepstral::{extract_mcep, mcd_prefix, mcd_spliced_vs_original, CepstralParams};
use ceremony_sim::code::SecurityCode;
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::splice::{synthesize_code_audio, DEFAULT_GAP_MS};

fn main() -> ceremony_sim::Result<()> {
    let corpus = SyntheticCorpus::default().build();
    let params = CepstralParams::default();
    let original: SecurityCode = "25088 17100 06194 63649 83034 21827 79601 84031".parse()?;
    let reordered: SecurityCode = "14815 60480 57325 94843 74452 98530 15305 10392".parse()?;

    for speaker in corpus.speakers() {
        let voice = corpus.library(speaker)?;
        let (rec, rec_spans) = synthesize_code_audio(voice, &original, DEFAULT_GAP_MS)?;
        let (forged, forged_spans) = synthesize_code_audio(voice, &reordered, DEFAULT_GAP_MS)?;
        let r = mcd_spliced_vs_original(&rec, &rec_spans, &forged, &forged_spans, &params)?;
        println!("{speaker:<5} spliced vs original: mean {:.2} dB", r.mean);
    }

    // Same digit, different speakers.
    let a = corpus.library("adam")?.get(5).expect("digit 5");
    let b = corpus.library("dana")?.get(5).expect("digit 5");
    let d = mcd_prefix(
        &extract_mcep(a.clip(), &params)?,
        &extract_mcep(b.clip(), &params)?,
    )?;
    println!("digit 5, adam vs dana: {d:.2} dB");
    Ok(())
}

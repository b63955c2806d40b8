// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Splices a reordered code out of a recorded announcement and writes both.
//!
//! cargo run --example splice_announcement -- [out-dir]

use ceremony_sim::audio::write_wav;
use ceremony_sim::code::SecurityCode;
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::splice::{
    harvest_labeled_recording, synthesize_code_audio, write_spans, Provenance, ProvenanceKind,
    SnippetLibrary, DEFAULT_GAP_MS,
};

fn main() -> ceremony_sim::Result<()> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let corpus = SyntheticCorpus::default().build();
    let voice = corpus.library("carl")?;

    let original: SecurityCode = "71473 01124 17618 89972 05385 35076 05608 12065".parse()?;
    let reordered: SecurityCode = "44618 84509 13996 12990 53598 89281 53073 85236".parse()?;

    // The victim announces the original code; the attacker hears it.
    let (recording, spans) = synthesize_code_audio(voice, &original, DEFAULT_GAP_MS)?;
    let stolen = harvest_labeled_recording(
        &recording,
        &spans,
        "carl",
        &Provenance::new(ProvenanceKind::CeremonyCapture, "example"),
    )?;
    let mut library = SnippetLibrary::new("carl");
    library.merge(&stolen)?;
    println!("stolen digits: {:?}", library.digits());

    let (forged, forged_spans) = synthesize_code_audio(&library, &reordered, DEFAULT_GAP_MS)?;
    write_wav(&recording, out.join("original.wav"))?;
    write_spans(&spans, out.join("original.spans"))?;
    write_wav(&forged, out.join("reordered.wav"))?;
    write_spans(&forged_spans, out.join("reordered.spans"))?;
    println!(
        "original {:.2} s, reordered {:.2} s, written to {}",
        recording.duration_seconds(),
        forged.duration_seconds(),
        out.display()
    );
    Ok(())
}

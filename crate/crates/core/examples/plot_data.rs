// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Time- and frequency-domain data for an original and a spliced announcement.
//!
//! cargo run --example plot_data -- [out-dir]

use ceremony_sim::cepstral::CepstralParams;
use ceremony_sim::code::SecurityCode;
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::report::emit_plot_data;
use ceremony_sim::splice::{
    harvest_labeled_recording, synthesize_code_audio, Provenance, ProvenanceKind, SnippetLibrary,
    DEFAULT_GAP_MS,
};

fn main() -> ceremony_sim::Result<()> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let corpus = SyntheticCorpus::default().build();
    let code: SecurityCode = "40008 55812 36183 49046 68787 34111 34371 14180".parse()?;

    let (original, spans) = synthesize_code_audio(corpus.library("dana")?, &code, DEFAULT_GAP_MS)?;
    let mut stolen = SnippetLibrary::new("dana");
    stolen.merge(&harvest_labeled_recording(
        &original,
        &spans,
        "dana",
        &Provenance::new(ProvenanceKind::CeremonyCapture, "example"),
    )?)?;
    let (spliced, _) = synthesize_code_audio(&stolen, &code, DEFAULT_GAP_MS)?;

    let params = CepstralParams::default();
    for (name, clip) in [("original", &original), ("spliced", &spliced)] {
        let (t, f) = emit_plot_data(clip, &params, out.join(name))?;
        println!("{} {}", t.display(), f.display());
    }
    let same = std::fs::read(out.join("original.freq.csv")).ok()
        == std::fs::read(out.join("spliced.freq.csv")).ok();
    println!("frequency data identical: {same}");
    Ok(())
}

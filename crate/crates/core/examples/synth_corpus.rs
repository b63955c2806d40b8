// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Writes the synthetic six-speaker digit corpus to a directory.
//!
//! cargo run --example synth_corpus -- <out-dir> [seed]

use ceremony_sim::corpus::{synthesize_corpus, SyntheticCorpus};

fn main() -> ceremony_sim::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "corpus".into());
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let synth = SyntheticCorpus {
        seed,
        ..SyntheticCorpus::default()
    };
    let corpus = synthesize_corpus(&synth, &dir)?;
    for speaker in corpus.speakers() {
        let lib = corpus.library(speaker)?;
        let secs: f64 = lib.snippets().map(|s| s.clip().duration_seconds()).sum();
        println!(
            "{speaker:<5} {:<19} {} digits, {secs:.2} s",
            corpus.label(speaker),
            lib.len()
        );
    }
    println!("wrote {dir}");
    Ok(())
}

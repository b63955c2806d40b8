// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Six speakers by two capture channels, written as report.csv and report.txt.
//!
//! cargo run --release --example table_report -- [out-dir]

use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::report::run_experiment;
use ceremony_sim::scenario::{CorpusConfig, ScenarioConfig};

fn main() -> ceremony_sim::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| ".".into());
    let corpus = SyntheticCorpus::default().build();
    let mut config = ScenarioConfig::default();
    config.victim.require_all_digits = true;
    config.corpus = Some(CorpusConfig::default());

    let report = run_experiment(&config, &corpus)?;
    report.write(&out)?;
    print!("{}", report.to_text());
    Ok(())
}

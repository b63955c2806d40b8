// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! The attack under each mitigation, and the deferred-generation window.
//!
//! cargo run --example mitigation_matrix

use ceremony_sim::attack::run_mitigation_matrix;
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::scenario::ScenarioConfig;

fn main() -> ceremony_sim::Result<()> {
    let corpus = SyntheticCorpus::default().build();
    let mut config = ScenarioConfig::default();
    config.victim.require_all_digits = true;

    for prep in [30, 10, 1] {
        config.attacker.prep_time_s = prep;
        let row: Vec<String> = run_mitigation_matrix(&config, &corpus)?
            .iter()
            .map(|o| match o.failure_reason {
                Some(r) => format!("{}: {r}", o.mitigation),
                None => format!("{}: success", o.mitigation),
            })
            .collect();
        println!("prep {prep:>2} s  {}", row.join("  |  "));
    }
    Ok(())
}

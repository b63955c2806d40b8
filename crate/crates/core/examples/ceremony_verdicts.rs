// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! One attack run: spliced voice, missing digit, and impostor voice.
//!
//! cargo run --example ceremony_verdicts

use ceremony_sim::attack::execute_attack;
use ceremony_sim::corpus::SyntheticCorpus;
use ceremony_sim::meeting::export_event_log;
use ceremony_sim::scenario::ScenarioConfig;

fn main() -> ceremony_sim::Result<()> {
    let corpus = SyntheticCorpus::default().build();
    let mut config = ScenarioConfig::default();
    config.victim.speaker = "beth".into();
    config.victim.name = "Beth".into();
    config.victim.require_all_digits = true;

    let spliced = execute_attack(&config, &corpus)?;
    print!("{}", spliced.to_record());
    print!("{}", export_event_log(&spliced.timeline));

    let mut dropped = config.clone();
    dropped.attacker.drop_digits = vec![spliced.injected_code.digits()[0]];
    let out = execute_attack(&dropped, &corpus)?;
    println!(
        "\nwithout digit {}: {:?}",
        dropped.attacker.drop_digits[0], out.failure_reason
    );

    let mut impostor = config;
    impostor.attacker.impostor_speaker = Some("fern".into());
    let out = execute_attack(&impostor, &corpus)?;
    for v in &out.verdicts {
        println!("impostor voice, {}: {}", v.participant, v.verdict);
    }
    Ok(())
}

// Copyright 2026 The ceremony-sim Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use ceremony_sim::attack::{execute_attack, AttackerModel, CloudRecording, ATTACKER_ID};
use ceremony_sim::audio::ChannelModel;
use ceremony_sim::code::{derive_security_code, IdentityKey};
use ceremony_sim::meeting::{CeremonyAnnouncement, MeetingSession, Mitigation};
use ceremony_sim::scenario::{AttackerKind, ChannelKind, MitigationMode};
use ceremony_sim::splice::splice_digits;
use ceremony_sim::Error;
use proptest::prelude::*;

#[derive(Clone, Debug)]
enum Step {
    Invite,
    Join,
    Announce,
    ObserveAsServer,
    ObserveAsParticipant,
    RaidAsParticipant,
    RaidAsServer,
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        Just(Step::Invite),
        Just(Step::Join),
        Just(Step::Announce),
        Just(Step::ObserveAsServer),
        Just(Step::ObserveAsParticipant),
        Just(Step::RaidAsParticipant),
        Just(Step::RaidAsServer),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn capabilities_hold_under_any_sequence(steps in proptest::collection::vec(step(), 1..12), e2ee in any::<bool>()) {
        let voice = common::corpus().library("adam").unwrap();
        let key = IdentityKey::from_bytes(&[4; 32]).unwrap();
        let mut session = MeetingSession::create("victim", "Adam", key, e2ee, Mitigation::None).unwrap();
        let mut server = AttackerModel::new(AttackerKind::Server, ChannelModel::Lossless, 30, key, "Adam");
        let mut participant = AttackerModel::new(AttackerKind::Participant, ChannelModel::Lossless, 30, key, "Adam");
        let (clip, spans) = splice_digits(voice, &[1, 2, 3], 150.0).unwrap();
        let store = vec![CloudRecording { source: "r".into(), speaker: "Adam".into(), clip, spans }];

        for s in steps {
            match s {
                Step::Invite => { let _ = session.invite(ATTACKER_ID); }
                Step::Join => { let _ = session.join(ATTACKER_ID); }
                Step::Announce => {
                    if let Some(code) = session.security_code().copied() {
                        let (a, sp) = splice_digits(voice, code.digits(), 150.0).unwrap();
                        let ann = CeremonyAnnouncement::new(a, sp, code, "victim").unwrap();
                        let at = session.clock();
                        let _ = session.announce_code(ann, at);
                    }
                }
                Step::ObserveAsServer => {
                    prop_assert!(matches!(server.observe_ceremony(&session), Err(Error::Capability(_))));
                }
                Step::ObserveAsParticipant => {
                    let allowed = e2ee && session.participants().contains(ATTACKER_ID);
                    let r = participant.observe_ceremony(&session);
                    if !allowed {
                        prop_assert!(matches!(r, Err(Error::Capability(_))));
                    }
                }
                Step::RaidAsParticipant => {
                    prop_assert!(matches!(participant.raid_cloud_recordings(&store), Err(Error::Capability(_))));
                }
                Step::RaidAsServer => server.raid_cloud_recordings(&store).unwrap(),
            }
            // The server only ever holds cloud digits; the participant only ceremony digits.
            prop_assert!(server.library().digits().iter().all(|d| [1, 2, 3].contains(d)));
            prop_assert!(participant.library().is_empty() || e2ee);
        }
    }

    #[test]
    fn outcomes_are_deterministic(seed in any::<u64>(), speaker in 0usize..6, phone in any::<bool>(), mode in 0usize..3) {
        let mut c = common::baseline(&common::speakers()[speaker]);
        c.seed = seed;
        c.attacker.channel = if phone { ChannelKind::Phone } else { ChannelKind::Lossless };
        c.mitigation.mode = [MitigationMode::None, MitigationMode::Deferred, MitigationMode::Oob][mode];
        let a = execute_attack(&c, common::corpus()).unwrap();
        let b = execute_attack(&c, common::corpus()).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn success_decomposes(
        seed in any::<u64>(),
        speaker in 0usize..6,
        impostor in proptest::option::of(0usize..6),
        drop in proptest::collection::vec(0u8..10, 0..2),
        mode in 0usize..3,
        prep in 0u64..40,
        all_digits in any::<bool>(),
    ) {
        let names = common::speakers();
        let mut c = common::baseline(&names[speaker]);
        c.seed = seed;
        c.victim.require_all_digits = all_digits;
        c.attacker.impostor_speaker = impostor.map(|i| names[i].clone());
        c.attacker.drop_digits = drop;
        c.attacker.prep_time_s = prep;
        c.mitigation.mode = [MitigationMode::None, MitigationMode::Deferred, MitigationMode::Oob][mode];
        let out = execute_attack(&c, common::corpus()).unwrap();
        prop_assert_eq!(out.success, out.failure_reason.is_none() && out.announced);
        if out.success {
            let (_, attacker_key) = ceremony_sim::attack::scenario_keys(&c).unwrap();
            prop_assert_eq!(out.injected_code, derive_security_code(&attacker_key));
            prop_assert!(out.verdicts.iter().all(|v| v.verdict.is_accept()));
            prop_assert!(out.per_digit_mcd.iter().all(|d| d.mcd <= c.verifier.threshold_db));
            prop_assert_eq!(c.mitigation.mode == MitigationMode::Oob, false);
            let log = &out.timeline;
            prop_assert!(log.iter().any(|e| e.kind == ceremony_sim::meeting::EventKind::Verified));
        }
    }

    #[test]
    fn complete_library_always_succeeds(seed in any::<u64>(), speaker in 0usize..6, phone in any::<bool>(), upsample in any::<bool>()) {
        let mut c = common::baseline(&common::speakers()[speaker]);
        c.seed = seed;
        if phone {
            c.attacker.channel = ChannelKind::Phone;
            c.attacker.phone_rate = upsample.then_some(16_000);
        }
        let out = execute_attack(&c, common::corpus()).unwrap();
        prop_assert!(out.success, "{}", out.to_record());
        prop_assert!(out.mean_mcd.unwrap().abs() <= 1e-9);
    }
}

#[test]
fn server_attack_needs_cloud_digits() {
    let mut c = common::baseline("dana");
    c.attacker.kind = AttackerKind::Server;
    c.victim.cloud_recordings = vec!["0123".into(), "4567".into()];
    let out = execute_attack(&c, common::corpus()).unwrap();
    let missing = out.injected_code.digits().iter().copied().find(|d| *d >= 8);
    match missing {
        Some(d) => assert_eq!(
            out.failure_reason,
            Some(ceremony_sim::attack::FailureReason::MissingDigit(d))
        ),
        None => assert!(out.success),
    }
}

#[test]
fn missing_victim_digit_is_a_modeled_failure() {
    let mut corpus = common::corpus().clone();
    corpus.library_mut("adam").unwrap().remove(3);
    let c = common::baseline("adam");
    let out = execute_attack(&c, &corpus).unwrap();
    assert_eq!(
        out.failure_reason,
        Some(ceremony_sim::attack::FailureReason::MissingDigit(3))
    );
    assert!(!out.announced);
}
